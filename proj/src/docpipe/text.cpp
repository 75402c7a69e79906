#include "dthread/docpipe/text.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace dthread::docpipe {
namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return is_alpha(c) || is_digit(c); }

const std::set<std::string, std::less<>>& stopwords() {
  static const std::set<std::string, std::less<>> words = {
      "a",      "about",   "above",   "after",   "again",  "against", "all",     "also",    "always",  "am",
      "among",  "an",      "and",     "any",     "are",    "as",      "at",      "be",      "because", "been",
      "before", "being",   "below",   "between", "both",   "but",     "by",      "can",     "could",   "did",
      "do",     "does",    "down",    "during",  "e.g",    "each",    "either",  "etc",     "every",   "few",
      "for",    "from",    "had",     "has",     "have",   "he",      "her",     "here",    "his",     "how",
      "i.e",    "if",      "in",      "into",    "is",     "it",      "its",     "least",   "less",    "many",
      "may",    "might",   "more",    "most",    "must",   "neither", "never",   "no",      "nor",     "not",
      "of",     "off",     "on",      "once",    "one",    "only",    "onto",    "or",      "other",   "our",
      "out",    "over",    "per",     "same",    "shall",  "she",     "should",  "so",      "some",    "such",
      "than",   "that",    "the",     "their",   "them",   "then",    "there",   "these",   "they",    "this",
      "those",  "three",   "through", "to",      "too",    "twice",   "two",     "under",   "until",   "up",
      "upon",   "very",    "via",     "was",     "we",     "were",    "what",    "when",    "where",   "whether",
      "which",  "while",   "who",     "whom",    "whose",  "will",    "with",    "within",  "without", "would",
      "you",    "your",    "four",    "five",    "six",    "seven",   "eight",   "nine",    "ten",     "zero",
      "while",  "however", "thereby", "therefore", "shown", "given",  "respectively", "approximately",
  };
  return words;
}

const std::set<std::string, std::less<>>& determiners() {
  static const std::set<std::string, std::less<>> words = {"the", "a",    "an",    "each",  "every", "all",
                                                           "both", "its", "their", "either", "any",  "this",
                                                           "these", "that", "those"};
  return words;
}

const std::set<std::string, std::less<>>& verb_lexicon() {
  static const std::set<std::string, std::less<>> words = {
      "accept",   "acquire",   "allow",     "attach",     "be",        "capture",   "carry",    "charge",
      "command",  "communicate", "comply",  "connect",    "consume",   "contain",   "control",  "convert",
      "deliver",  "deploy",    "detect",    "determine",  "dissipate", "distribute", "downlink", "drive",
      "enable",   "ensure",    "enter",     "execute",    "exceed",    "exit",      "feed",     "fit",
      "forward",  "generate",  "have",      "hold",       "house",     "include",   "inhibit",  "keep",
      "limit",    "maintain",  "measure",   "meet",       "monitor",   "mount",     "notify",   "operate",
      "perform",  "point",     "power",     "prevent",    "produce",   "protect",   "provide",  "pump",
      "receive",  "record",    "recover",   "regulate",   "relay",     "release",   "remain",   "report",
      "require",  "reset",     "return",    "route",      "send",      "separate",  "stabilize", "store",
      "supply",   "support",   "survive",   "sustain",    "switch",    "transfer",  "transmit", "uplink",
      "use",      "vent",      "weigh",     "withstand",  "interface", "exchange",  "fix",      "secure",
      "illuminate", "heat",    "cool",      "actuate",    "sense",     "image",
  };
  return words;
}

// Heads that name a property, quantity or information item rather than a part.
const std::set<std::string, std::less<>>& abstract_heads() {
  static const std::set<std::string, std::less<>> words = {
      "accuracy",  "amount",   "bandwidth", "budget",     "capacity",  "command",  "condition", "current",
      "data",      "dimension", "dose",     "duration",   "energy",    "envelope", "environment", "frequency",
      "image",     "level",    "life",      "lifetime",   "limit",     "load",     "margin",    "mass",
      "maximum",   "minimum",  "mission",   "mode",       "number",    "operation", "orbit",    "period",
      "power",     "radiation", "range",    "rate",       "requirement", "resolution", "shock", "size",
      "speed",     "state",    "status",    "telemetry",  "temperature", "test",    "time",      "total",
      "value",     "velocity", "vibration", "voltage",    "volume",    "weight",   "phase",     "attitude",
      "signal",    "message",  "packet",    "link",       "standard",  "document", "specification", "procedure",
      "lifetime",  "heat",     "pointing",  "interface",  "note",      "section",  "overview",  "purpose",
  };
  return words;
}

bool adverb(std::string_view w) {
  static const std::set<std::string, std::less<>> exceptions = {"assembly", "supply", "family", "anomaly",
                                                                "reply",    "apply",  "rely",   "poly"};
  return w.size() > 4 && w.substr(w.size() - 2) == "ly" && !exceptions.contains(w);
}

bool has_inner_upper(std::string_view w) {
  return std::any_of(w.begin() + (w.empty() ? 0 : 1), w.end(),
                     [](char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; });
}

}  // namespace

std::string head_key(std::string_view word) {
  const bool acronym = std::all_of(word.begin(), word.end(), [](char c) { return !std::islower(static_cast<unsigned char>(c)); });
  if (acronym) return to_lower(word);
  if (word.size() > 2 && word.back() == 's' &&
      std::all_of(word.begin(), word.end() - 1, [](char c) { return !std::islower(static_cast<unsigned char>(c)); })) {
    return to_lower(word.substr(0, word.size() - 1));
  }
  return singularize(to_lower(word));
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (is_alnum(c)) {
      std::size_t j = i;
      bool letter = false;
      while (j < text.size()) {
        const char d = text[j];
        if (is_alnum(d)) {
          letter = letter || is_alpha(d);
          ++j;
        } else if ((d == '-' || d == '\'') && j + 1 < text.size() && is_alnum(text[j + 1])) {
          ++j;
        } else if (d == '.' && !letter && j + 1 < text.size() && is_digit(text[j + 1])) {
          ++j;  // decimal point inside a number
        } else {
          break;
        }
      }
      tokens.push_back({text.substr(i, j - i), i, letter ? TokenClass::kWord : TokenClass::kNumber});
      i = j;
      continue;
    }
    tokens.push_back({text.substr(i, 1), i, TokenClass::kPunct});
    ++i;
  }
  return tokens;
}

bool is_stopword(std::string_view lowered) { return stopwords().contains(lowered); }
bool is_determiner(std::string_view lowered) { return determiners().contains(lowered); }
bool is_modal(std::string_view lowered) {
  return lowered == "shall" || lowered == "must" || lowered == "will" || lowered == "should";
}

std::optional<std::string> verb_base(std::string_view w) {
  const auto& lex = verb_lexicon();
  auto hit = [&](std::string candidate) -> std::optional<std::string> {
    if (lex.contains(candidate)) return candidate;
    return std::nullopt;
  };
  auto ends = [&](std::string_view suffix) {
    return w.size() > suffix.size() + 1 && w.substr(w.size() - suffix.size()) == suffix;
  };
  if (auto r = hit(std::string(w))) return r;
  auto strip = [&](std::size_t n) { return std::string(w.substr(0, w.size() - n)); };
  if (ends("ies")) {
    if (auto r = hit(strip(3) + "y")) return r;
  }
  if (ends("ied")) {
    if (auto r = hit(strip(3) + "y")) return r;
  }
  if (ends("es")) {
    if (auto r = hit(strip(2))) return r;
  }
  if (ends("s") && !ends("ss")) {
    if (auto r = hit(strip(1))) return r;
  }
  for (std::string_view suffix : {std::string_view("ed"), std::string_view("ing")}) {
    if (!ends(suffix)) continue;
    std::string stem = strip(suffix.size());
    if (auto r = hit(stem)) return r;
    if (auto r = hit(stem + "e")) return r;
    if (stem.size() > 2 && stem[stem.size() - 1] == stem[stem.size() - 2]) {
      if (auto r = hit(stem.substr(0, stem.size() - 1))) return r;
    }
  }
  if (ends("d")) {
    if (auto r = hit(strip(1))) return r;
  }
  return std::nullopt;
}

std::string singularize(std::string_view w) {
  auto ends = [&](std::string_view suffix) { return w.size() > suffix.size() && w.substr(w.size() - suffix.size()) == suffix; };
  if (w.size() <= 3) return std::string(w);
  if (ends("ies")) return std::string(w.substr(0, w.size() - 3)) + "y";
  if (ends("sses") || ends("xes") || ends("ches") || ends("shes") || ends("zes")) {
    return std::string(w.substr(0, w.size() - 2));
  }
  if (ends("ss") || ends("us") || ends("is") || ends("ics")) return std::string(w);
  if (ends("s")) return std::string(w.substr(0, w.size() - 1));
  return std::string(w);
}

std::vector<NounPhrase> noun_phrases(std::string_view text) {
  const auto tokens = tokenize(text);
  std::vector<NounPhrase> out;
  std::optional<NounPhrase> current;
  bool prev_determiner = false;
  std::size_t current_end = 0;

  auto flush = [&] {
    if (current) {
      current->span.end = current_end;
      std::string term;
      for (const auto& w : current->words) {
        if (!term.empty()) term += ' ';
        term += to_lower(w);
      }
      current->term = term;
      const auto last_space = term.rfind(' ');
      const std::string head = term.substr(last_space == std::string::npos ? 0 : last_space + 1);
      current->key = term.substr(0, term.size() - head.size()) + head_key(current->words.back());
      out.push_back(std::move(*current));
      current.reset();
    }
  };

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (t.cls != TokenClass::kWord) {
      flush();
      prev_determiner = false;
      continue;
    }
    const std::string lw = to_lower(t.text);
    // a number directly before a word makes it a unit ("4 kg")
    const bool after_number = i > 0 && tokens[i - 1].cls == TokenClass::kNumber;
    bool noun = !is_stopword(lw) && !adverb(lw) && !after_number;
    if (noun && verb_base(lw) && !prev_determiner && !current) noun = false;
    if (!noun) {
      flush();
      prev_determiner = is_determiner(lw);
      continue;
    }
    if (!current) {
      current = NounPhrase{};
      current->span.start = t.offset;
      current->determined = prev_determiner;
    }
    current->words.emplace_back(t.text);
    current_end = t.offset + t.text.size();
    prev_determiner = false;
  }
  flush();
  return out;
}

bool is_abstract_head(const NounPhrase& phrase) {
  if (phrase.words.empty()) return true;
  return abstract_heads().contains(head_key(phrase.words.back()));
}

std::string display_name(const NounPhrase& phrase) {
  std::string out;
  for (std::size_t i = 0; i < phrase.words.size(); ++i) {
    std::string w = phrase.words[i];
    const bool head = i + 1 == phrase.words.size();
    const bool keep_case = has_inner_upper(w);
    if (head) {
      if (keep_case && w.size() > 2 && w.back() == 's' && std::isupper(static_cast<unsigned char>(w[w.size() - 2]))) {
        w.pop_back();  // "OBCs"
      } else if (!keep_case) {
        w = singularize(to_lower(w));
      }
    }
    if (!keep_case) {
      w = to_lower(w);
      if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    }
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace dthread::docpipe
