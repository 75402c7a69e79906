#include <gtest/gtest.h>

#include <random>

#include "../support/expect_error.hpp"
#include "dthread/docpipe/document.hpp"
#include "dthread/docpipe/extract.hpp"
#include "dthread/docpipe/glossary.hpp"
#include "dthread/docpipe/text.hpp"

using namespace dthread;
using namespace dthread::core;
using namespace dthread::docpipe;
using dthread::testing::code_of;

namespace {

const std::string kCamera = "The camera shall send data to the processing unit.";

std::vector<std::string> sentence_texts(const DocumentArtifact& d) {
  std::vector<std::string> out;
  for (auto s : d.sentences) out.emplace_back(d.slice(s));
  return out;
}

}  // namespace

TEST(Ingest, SingleSentenceCoversText) {
  Model m;
  auto d = ingest_document(m, "camera", kCamera, DocFormat::kPlainText);
  ASSERT_EQ(d.sentences.size(), 1u);
  EXPECT_EQ(d.sentences[0].start, 0u);
  EXPECT_EQ(d.sentences[0].end, kCamera.size());
  EXPECT_EQ(d.uid.str(), "doc-0");
  EXPECT_EQ(m.locator(d.uid, Modality::kDocument), "doc-0");
}

TEST(Ingest, EmptyAndWhitespaceRejected) {
  Model m;
  EXPECT_EQ(code_of([&] { ingest_document(m, "e", "", DocFormat::kPlainText); }), Errc::kEmptyDocument);
  EXPECT_EQ(code_of([&] { ingest_document(m, "e", " \n\t\r\n", DocFormat::kPlainText); }), Errc::kEmptyDocument);
  EXPECT_TRUE(m.documents().empty());
}

TEST(Ingest, InvalidUtf8Rejected) {
  Model m;
  EXPECT_EQ(code_of([&] { ingest_document(m, "bad", "abc \xC3\x28 def", DocFormat::kPlainText); }),
            Errc::kInvalidEncoding);
  EXPECT_EQ(code_of([&] { ingest_document(m, "bad", "\xFF\xFE", DocFormat::kPlainText); }), Errc::kInvalidEncoding);
}

TEST(Ingest, NormalizesLineEndingsBomAndNfc) {
  EXPECT_EQ(normalize_text("\xEF\xBB\xBF" "a\r\nb\rc\n"), "a\nb\nc\n");
  // e + combining acute -> precomposed U+00E9
  EXPECT_EQ(normalize_text("caf\x65\xCC\x81"), "caf\xC3\xA9");
}

TEST(Ingest, TwoSentencesReconstruct) {
  const std::string a = "The radio shall transmit telemetry.";
  const std::string b = "The battery shall supply power.";
  const std::string text = a + " " + b;
  auto d = prepare_document("t", text, DocFormat::kPlainText);
  ASSERT_EQ(d.sentences.size(), 2u);
  EXPECT_LE(d.sentences[0].end, d.sentences[1].start);
  EXPECT_EQ(std::string(d.slice(d.sentences[0])), a);
  EXPECT_EQ(std::string(d.slice(d.sentences[1])), b);
  EXPECT_EQ(std::string(d.slice(d.sentences[0])) + " " + std::string(d.slice(d.sentences[1])), text);
}

TEST(Ingest, SplitRules) {
  auto d = prepare_document("t",
                            "Use rails, e.g. aluminium ones. Is it 3.6 V? Yes! Parts etc. are listed\n\nNew block "
                            "without stop\nstill same block.",
                            DocFormat::kPlainText);
  EXPECT_EQ(sentence_texts(d),
            (std::vector<std::string>{"Use rails, e.g. aluminium ones.", "Is it 3.6 V?", "Yes!",
                                      "Parts etc. are listed", "New block without stop\nstill same block."}));
}

TEST(Ingest, MarkdownMarkersOutsideSpans) {
  const std::string md =
      "# Power Subsystem\n\nThe EPS shall supply power.\n\n- The battery shall store energy.\n- Second item\n"
      "  continues here.\n1. Numbered item.\n> Quoted text.\n\n```\ncode. shall not. count.\n```\n---\nEnd.";
  auto d = prepare_document("t", md, DocFormat::kMarkdown);
  EXPECT_EQ(sentence_texts(d),
            (std::vector<std::string>{"Power Subsystem", "The EPS shall supply power.", "The battery shall store energy.",
                                      "Second item\n  continues here.", "Numbered item.", "Quoted text.", "End."}));
  // offsets are against the normalized text
  EXPECT_EQ(d.text.substr(d.sentences[0].start, 15), "Power Subsystem");
  EXPECT_EQ(d.text[d.sentences[0].start - 2], '#');
}

TEST(Ingest, SpansOrderedAndInBoundsOnRandomText) {
  std::mt19937 rng(7);
  const std::string alphabet = "ab .?!\n#-*1e.g";
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const int n = 1 + static_cast<int>(rng() % 80);
    for (int i = 0; i < n; ++i) text += alphabet[rng() % alphabet.size()];
    text += "x";
    for (auto fmt : {DocFormat::kPlainText, DocFormat::kMarkdown}) {
      auto spans = segment_sentences(text, fmt);
      std::size_t last = 0;
      for (auto s : spans) {
        ASSERT_LT(s.start, s.end);
        ASSERT_LE(s.end, text.size());
        ASSERT_GE(s.start, last);
        last = s.end;
      }
    }
  }
}

TEST(Annotate, CameraSentence) {
  Model m;
  auto d = ingest_document(m, "c", kCamera, DocFormat::kPlainText);
  BaselineAdapter base;
  auto c = annotate_candidates(d, base);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].trigger, "shall");
  EXPECT_EQ(c[0].confidence, Decimal::from_int(1));
  EXPECT_EQ(c[0].span, d.sentences[0]);
}

TEST(Annotate, WholeWordOnly) {
  Model m;
  auto d = ingest_document(m, "c", "Marshall Space Flight Center is in Huntsville. Willpower counts. Shallow water.",
                           DocFormat::kPlainText);
  BaselineAdapter base;
  EXPECT_TRUE(annotate_candidates(d, base).empty());
  auto d2 = ingest_document(m, "c2", "It MUST work. It Should too. Nothing here.", DocFormat::kPlainText);
  auto c = annotate_candidates(d2, base);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].trigger, "must");
  EXPECT_EQ(c[1].trigger, "should");
}

TEST(Annotate, BaselineIsDeterministic) {
  Model m;
  auto d = ingest_document(m, "c", kCamera + " The radio will listen. Nothing.", DocFormat::kPlainText);
  BaselineAdapter a, b;
  EXPECT_EQ(annotate_candidates(d, a), annotate_candidates(d, b));
}

TEST(Annotate, ReplayReproducesAndValidates) {
  Model m;
  auto d = ingest_document(m, "c", "Intro text. " + kCamera, DocFormat::kPlainText);
  const auto digest = request_digest(adapter_request(d));
  nlohmann::json good = {{"candidates", {{{"start", d.sentences[1].start}, {"end", d.sentences[1].end},
                                          {"trigger", "shall"}, {"confidence", "0.75"}}}}};
  ReplayAdapter replay(std::map<std::string, nlohmann::json>{{digest, good}});
  auto c = annotate_candidates(d, replay);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].confidence, Decimal::parse("0.75"));

  nlohmann::json off = {{"candidates", {{{"start", 1}, {"end", 5}, {"trigger", "shall"}}}}};
  ReplayAdapter bad(std::map<std::string, nlohmann::json>{{digest, off}});
  EXPECT_EQ(code_of([&] { annotate_candidates(d, bad); }), Errc::kAdapterFailure);

  nlohmann::json wrong_trigger = {
      {"candidates", {{{"start", d.sentences[0].start}, {"end", d.sentences[0].end}, {"trigger", "shall"}}}}};
  ReplayAdapter bad2(std::map<std::string, nlohmann::json>{{digest, wrong_trigger}});
  EXPECT_EQ(code_of([&] { annotate_candidates(d, bad2); }), Errc::kAdapterFailure);

  ReplayAdapter empty(std::map<std::string, nlohmann::json>{});
  EXPECT_EQ(code_of([&] { annotate_candidates(d, empty); }), Errc::kAdapterFailure);
}

TEST(Annotate, LiveWithoutEndpointFails) {
  unsetenv("DTHREAD_EXTRACTOR_URL");
  EXPECT_EQ(code_of([] { make_adapter(AdapterMode::kExternalLive, std::nullopt); }), Errc::kAdapterFailure);
}

TEST(Convert, ClassificationTable) {
  EXPECT_EQ(classify_requirement(kCamera), ReqType::kInterface);
  EXPECT_EQ(classify_requirement("The structure shall not exceed 4 kg."), ReqType::kConstraint);
  EXPECT_EQ(classify_requirement("The OBC shall boot within 30 s."), ReqType::kPerformance);
  EXPECT_EQ(classify_requirement("The camera shall capture images at 2 Hz."), ReqType::kPerformance);
  EXPECT_EQ(classify_requirement("The battery shall provide at least 20 Wh."), ReqType::kConstraint);
  EXPECT_EQ(classify_requirement("The EPS shall connect to the radio."), ReqType::kInterface);
  EXPECT_EQ(classify_requirement("The ADCS shall stabilize the spacecraft."), ReqType::kFunctional);
  EXPECT_EQ(priority_for_trigger("shall"), Priority::kHigh);
  EXPECT_EQ(priority_for_trigger("will"), Priority::kMed);
  EXPECT_EQ(priority_for_trigger("should"), Priority::kLow);
}

TEST(Convert, CameraRequirementKeepsSource) {
  Model m;
  auto d = ingest_document(m, "c", "Preamble here. " + kCamera, DocFormat::kPlainText);
  BaselineAdapter base;
  auto cands = annotate_candidates(d, base);
  auto reqs = convert_to_requirements(m, cands);
  ASSERT_EQ(reqs.size(), 1u);
  EXPECT_EQ(reqs[0].text, kCamera);
  EXPECT_EQ(reqs[0].type, ReqType::kInterface);
  EXPECT_EQ(reqs[0].status, ReqStatus::kProposed);
  ASSERT_TRUE(reqs[0].source);
  EXPECT_EQ(reqs[0].source->span, d.sentences[1]);
  EXPECT_TRUE(convert_to_requirements(m, {}).empty());
}

TEST(Convert, ExtractRegistersTracesAndIsIdempotent) {
  Model m;
  auto d = ingest_document(m, "c", kCamera + " The radio will transmit.", DocFormat::kPlainText);
  BaselineAdapter base;
  auto cands = annotate_candidates(d, base);
  auto uids = extract_requirements(m, cands);
  ASSERT_EQ(uids.size(), 2u);
  for (const auto& u : uids) {
    EXPECT_TRUE(m.has_trace({u, TraceKind::kDerivedFrom, d.uid}));
    const auto& r = m.requirement(u);
    EXPECT_EQ(std::string(d.slice(r.source->span)), r.text);
    EXPECT_EQ(m.locator(u, Modality::kDocument), document_locator(d.uid, r.source->span));
  }
  EXPECT_TRUE(extract_requirements(m, cands).empty());
  EXPECT_EQ(m.requirements().size(), 2u);
  EXPECT_TRUE(m.validate_integrity().empty());
}

TEST(Convert, DanglingDocument) {
  Model m;
  CandidateSpan c{Uid{"doc", 4}, {0, 3}, "shall", Decimal::from_int(1)};
  EXPECT_EQ(code_of([&] { convert_to_requirements(m, {c}); }), Errc::kUnresolvedReference);
}

TEST(Glossary, CountsProcessingUnit) {
  Model m;
  auto d = ingest_document(m, "g", kCamera + " The processing unit shall store images.", DocFormat::kPlainText);
  auto g = build_glossary(std::vector<DocumentArtifact>{d});
  ASSERT_TRUE(g.entries.contains("processing unit"));
  const auto& e = g.entries.at("processing unit");
  EXPECT_EQ(e.count, 2u);
  for (const auto& occ : e.occurrences) EXPECT_EQ(to_lower(d.slice(occ.span)), "processing unit");
  EXPECT_TRUE(g.entries.contains("camera"));
  for (const auto& [term, entry] : g.entries) {
    EXPECT_FALSE(term.empty());
    EXPECT_EQ(entry.count, entry.occurrences.size());
  }
}

TEST(Glossary, StopwordsOnly) {
  Model m;
  auto d = ingest_document(m, "g", "It is what it is. And so on, to the very one of them.", DocFormat::kPlainText);
  EXPECT_TRUE(build_glossary(std::vector<DocumentArtifact>{d}).entries.empty());
}

TEST(Text, NounPhrases) {
  auto nps = noun_phrases(kCamera);
  std::vector<std::string> terms;
  for (const auto& np : nps) terms.push_back(np.term);
  EXPECT_EQ(terms, (std::vector<std::string>{"camera", "data", "processing unit"}));
  EXPECT_TRUE(nps[0].determined);
  EXPECT_EQ(display_name(nps[2]), "Processing Unit");
  EXPECT_EQ(head_key("OBCs"), "obc");
  EXPECT_EQ(head_key("Cameras"), "camera");
  EXPECT_EQ(singularize("batteries"), "battery");
  EXPECT_EQ(verb_base("supplies"), "supply");
  EXPECT_FALSE(verb_base("processing"));
}
