#include "dthread/verify/report.hpp"

#include "dthread/core/digest.hpp"
#include "dthread/store/project_file.hpp"

namespace dthread::verify {
namespace {

constexpr const char* kLimitation =
    "geometry is approximated by axis-aligned boxes around each product's CARTESIAN_POINTs; "
    "curved surfaces and boolean results are not evaluated";

nlohmann::ordered_json policy_json(const VerifyPolicy& p) {
  nlohmann::ordered_json j;
  j["contact_tolerance"] = geom::to_decimal(p.geo.contact_tolerance).to_string() + " mm";
  j["min_clearance"] = geom::to_decimal(p.geo.min_clearance).to_string() + " mm";
  j["max_axis_angle"] = geom::to_decimal(p.geo.max_axis_angle).to_string() + " deg";
  j["depth_bound"] = p.behavior.depth_bound;
  j["state_cap"] = p.behavior.state_cap;
  j["relational_rules"] = p.rules.to_json()["rules"];
  return j;
}

nlohmann::ordered_json body(const VerificationReport& r, const VerifyPolicy& policy) {
  nlohmann::ordered_json j;
  j["format"] = "dthread-report";
  j["version"] = 1;
  j["model_digest"] = r.model_digest;
  j["policy"] = policy_json(policy);
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  for (const auto& [key, n] : r.summary) {
    summary[std::string(to_string(key.first)) + "/" + std::string(to_string(key.second))] = n;
  }
  j["summary"] = summary;
  j["totals"] = {{"Error", r.count(Severity::kError)},
                 {"Warning", r.count(Severity::kWarning)},
                 {"Info", r.count(Severity::kInfo)}};
  auto& findings = j["findings"] = nlohmann::ordered_json::array();
  for (const auto& f : r.findings) findings.push_back(finding_to_json(f));
  j["limitations"] = {kLimitation};
  return j;
}

}  // namespace

std::size_t VerificationReport::count(Severity severity) const {
  std::size_t n = 0;
  for (const auto& f : findings) n += f.severity == severity;
  return n;
}

VerificationReport run_full_verification(const core::Model& model, const VerifyPolicy& policy,
                                         const VerifyInputs& inputs) {
  VerificationReport report;
  report.model_digest = store::model_digest(model);
  auto append = [&](std::vector<Finding> block) {
    sort_findings(block);
    report.findings.insert(report.findings.end(), block.begin(), block.end());
  };

  append(integrity_findings(model));

  std::vector<Finding> geometry_notes;
  for (const auto& w : inputs.geometry_warnings) {
    Finding f{Phase::kPhase1Geometric, Severity::kWarning, "geometric.file", {}, w, {}};
    for (const auto& [uid, g] : model.geometry()) {
      if (w.find(g.path) != std::string::npos) f.subjects.push_back(uid);
    }
    geometry_notes.push_back(std::move(f));
  }
  auto phase1 = run_phase1(model, inputs.geometry, policy.geo, policy.rules);
  geometry_notes.insert(geometry_notes.end(), phase1.begin(), phase1.end());
  // run_phase1 already groups by check; keep that grouping
  std::stable_sort(geometry_notes.begin(), geometry_notes.end(),
                   [](const Finding& a, const Finding& b) { return a.phase < b.phase; });
  for (auto& f : geometry_notes) report.findings.push_back(std::move(f));

  std::vector<ConstraintSpec> specs;
  std::vector<Finding> constraint_findings;
  for (const auto& [uid, record] : model.constraints()) {
    try {
      ConstraintSpec spec = parse_constraint(record.text);
      spec.uid = uid;
      spec.origin = record.origin;
      specs.push_back(std::move(spec));
    } catch (const Error& e) {
      Finding f{Phase::kPhase2Constraint, Severity::kError, "constraint.invalid", {uid},
                "'" + record.text + "' does not parse: " + e.what(), {}};
      f.evidence["constraint"] = record.text;
      constraint_findings.push_back(std::move(f));
    }
  }
  specs.insert(specs.end(), inputs.extra_specs.begin(), inputs.extra_specs.end());
  auto evaluated = evaluate_constraints(model, specs);
  constraint_findings.insert(constraint_findings.end(), evaluated.begin(), evaluated.end());
  append(std::move(constraint_findings));

  std::vector<Finding> behavior;
  for (const auto& [uid, sm] : model.state_machines()) {
    auto f = check_state_machine(sm, policy.behavior);
    behavior.insert(behavior.end(), f.begin(), f.end());
  }
  for (const auto& sm : inputs.extra_machines) {
    auto f = check_state_machine(sm, policy.behavior);
    behavior.insert(behavior.end(), f.begin(), f.end());
  }
  append(std::move(behavior));

  for (const auto& f : report.findings) ++report.summary[{f.phase, f.severity}];
  return report;
}

nlohmann::ordered_json report_to_json(const VerificationReport& report, const VerifyPolicy& policy) {
  auto j = body(report, policy);
  j["digest"] = sha256_hex(j.dump());
  return j;
}

std::string report_digest(const VerificationReport& report, const VerifyPolicy& policy) {
  return sha256_hex(body(report, policy).dump());
}

}  // namespace dthread::verify
