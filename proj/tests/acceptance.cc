// Copyright 2026 The MICA Simulator Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance run: one PASS/FAIL line per headline criterion, with timings.
// Exits non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mica/flow_oracle.h"
#include "mica/policy.h"
#include "mica/topology.h"
#include "oracle/checker_diff.h"
#include "test_util.h"

namespace mica {
namespace {

using Clock = std::chrono::steady_clock;

// Collects failure reasons for one criterion.
class Check {
 public:
  void Expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  bool ok() const { return failures_.empty(); }
  std::string Summary() const {
    std::string out;
    for (size_t i = 0; i < failures_.size() && i < 5; ++i) {
      out += (i ? "; " : "") + failures_[i];
    }
    if (failures_.size() > 5) {
      out += "; +" + std::to_string(failures_.size() - 5) + " more";
    }
    return out;
  }

 private:
  std::vector<std::string> failures_;
};

std::string Reason(const ScenarioReport& r) {
  std::string d = testing::Describe(r);
  for (char& c : d) {
    if (c == '\n') c = ' ';
  }
  return d;
}

bool RunScenario(const std::string& path, Check* c,
                 std::unique_ptr<ScenarioRunner>* keep = nullptr) {
  auto parsed = LoadScenario(testing::SourcePath(path));
  if (!parsed.ok()) {
    c->Expect(false, path + ": " + parsed.status().ToString());
    return false;
  }
  auto runner = std::make_unique<ScenarioRunner>(*parsed);
  ScenarioReport report = runner->Run();
  c->Expect(report.passed(), path + ":" + Reason(report));
  if (keep != nullptr) *keep = std::move(runner);
  return report.passed();
}

void TwoPeerFidelity(Check* c) {
  auto policy = ParsePolicy(testing::ReadSource("scenarios/policies/gateway-pair.json"));
  c->Expect(policy.ok(), "policy does not parse");
  if (!policy.ok()) return;
  auto blob = EncodePolicy(*policy);
  c->Expect(blob.ok(), "policy does not encode");
  if (!blob.ok()) return;
  auto back = DecodePolicy(*blob);
  c->Expect(back.ok() && *back == *policy, "binary round trip differs");

  std::unique_ptr<ScenarioRunner> runner;
  if (!RunScenario("scenarios/two-peer.json", c, &runner)) return;
  const Platform& pf = runner->const_platform();
  constexpr uint64_t kMem1 = 0x18000000000;
  const std::pair<const char*, Rights> want[] = {{"P1", Rights::W()},
                                                 {"P2", Rights::R()}};
  for (const auto& [name, rights] : want) {
    RealmId r = *runner->RealmByName(name);
    const Realm& realm = *pf.realm(r);
    const ChannelBinding* b = realm.FindBinding("Mem1");
    c->Expect(b != nullptr && b->ipa_base == kMem1,
              std::string(name) + " has no Mem1 binding at 0x18000000000");
    auto it = realm.rtt.find(kMem1);
    c->Expect(it != realm.rtt.end() && pf.EffectiveRights(r, it->second) == rights,
              std::string(name) + " effective rights on Mem1 differ");
    if (it != realm.rtt.end()) {
      c->Expect(pf.RowActive(it->second.pa), std::string(name) + " row inactive");
    }
  }
}

void TokenLinearity(Check* c) {
  auto rows = ChainTokenSizes(6);
  c->Expect(rows.ok(), "chain sizes failed");
  if (!rows.ok()) return;
  std::vector<double> diffs;
  std::ostringstream sizes;
  for (size_t i = 0; i < rows->size(); ++i) {
    sizes << (i ? "," : "") << (*rows)[i].token_bytes;
    if (i > 0) {
      diffs.push_back(static_cast<double>((*rows)[i].token_bytes) -
                      static_cast<double>((*rows)[i - 1].token_bytes));
    }
  }
  c->Expect(diffs.size() == 5, "expected 6 chain sizes");
  if (diffs.empty()) return;
  double mean = 0;
  for (double d : diffs) mean += d;
  mean /= static_cast<double>(diffs.size());
  for (double d : diffs) {
    c->Expect(std::abs(d - mean) <= 0.10 * mean,
              "difference " + std::to_string(d) + " off the mean (sizes " +
                  sizes.str() + ")");
  }
  double expect = static_cast<double>(rows->front().platform_token_bytes) + 450.0;
  c->Expect(std::abs(mean - expect) <= 0.30 * expect,
            "increment " + std::to_string(mean) + " vs expected " +
                std::to_string(expect));
  std::cout << "  token sizes " << sizes.str() << ", increment " << mean
            << ", platform token " << rows->front().platform_token_bytes << "\n";
}

void OracleEquivalence(Check* c) {
  size_t runs = 0;
  auto one = [&](const ScenarioRunner& runner, const ScenarioReport& report,
                 const std::string& label) {
    ++runs;
    c->Expect(report.setup_error.empty(), label + ": " + report.setup_error);
    c->Expect(report.oracle_agrees, label + ":" + Reason(report));
    c->Expect(ComputeFlowOracle(runner.const_platform()) ==
                  DeriveFlowMatrix(runner.const_platform()),
              label + ": flow matrices differ");
    for (const auto& d : oracle::CheckerDisagreements(runner)) {
      c->Expect(false, label + ": " + d);
    }
  };
  for (const auto& path : testing::ShippedScenarios()) {
    auto sc = LoadScenario(testing::SourcePath(path));
    if (!sc.ok()) {
      c->Expect(false, path + ": " + sc.status().ToString());
      continue;
    }
    ScenarioRunner runner(*sc);
    ScenarioReport report = runner.Run();
    c->Expect(report.oracle_checked, path + ": oracle not run");
    c->Expect(report.oracle_agrees, path + ":" + Reason(report));
  }
  for (uint64_t seed = 0; seed < 200; ++seed) {
    ScenarioRunner runner(RandomScenario(seed));
    ScenarioReport report = runner.Run();
    one(runner, report, "seed " + std::to_string(seed));
  }
  std::cout << "  " << testing::ShippedScenarios().size()
            << " shipped scenarios, " << runs << " random topologies\n";
}

void InvariantSuite(Check* c) {
  std::string cmd = std::string("\"") + MICA_PROPERTY_TEST + "\" --gtest_brief=1";
  int rc = std::system(cmd.c_str());
  c->Expect(rc == 0, "property_test exited with " + std::to_string(rc));
}

void NegativeMatrix(Check* c) {
  struct Case {
    const char* file;
    const char* offender;
    const char* failure;
  };
  const Case cases[] = {
      {"ambiguous-peer", "A", "AmbiguousPeer"},
      {"size-mismatch", "A", "SizeMismatch"},
      {"duplicate-pa", "A", "DuplicatePa"},
      {"rights-escalation", "A", "RightsEscalation"},
      {"strict-violation", "A", "StrictViolation"},
      {"gateway-violation", "A", "GatewayViolation"},
      {"missing-marking", "A", "MissingSharedMarking"},
      {"any-exhausted", "C3", "AnyExhausted"},
  };
  for (const auto& k : cases) {
    std::string path = std::string("scenarios/negative/") + k.file + ".json";
    std::unique_ptr<ScenarioRunner> runner;
    if (!RunScenario(path, c, &runner)) continue;
    const Platform& pf = runner->const_platform();
    RealmId bad = *runner->RealmByName(k.offender);
    const Realm& realm = *pf.realm(bad);
    c->Expect(realm.state == RealmState::kTerminated,
              std::string(k.file) + ": offender not terminated");
    const ValidationReport* rep = pf.last_report(bad);
    c->Expect(rep != nullptr && ValidationFailureName(rep->failure) == k.failure,
              std::string(k.file) + ": wrong failure");
    c->Expect(realm.rtt.empty(), std::string(k.file) + ": offender keeps mappings");
    for (RealmId r : pf.realm_ids()) {
      if (r != bad) {
        c->Expect(pf.realm(r)->alive(),
                  std::string(k.file) + ": bystander " + runner->RealmName(r) +
                      " terminated");
      }
    }
    for (const SgtRow* row : pf.sgt().Rows()) {
      c->Expect(row->Find(bad) == nullptr,
                std::string(k.file) + ": offender still in the SGT");
    }
  }
}

struct Criterion {
  const char* name;
  double budget_ms;
  std::function<void(Check*)> run;
};

int Main() {
  const Criterion criteria[] = {
      {"two-peer policy fidelity", 1000, TwoPeerFidelity},
      {"group token linear growth", 5000, TokenLinearity},
      {"use case: gateway multiplexing", 2000,
       [](Check* c) { RunScenario("scenarios/gateway.json", c); }},
      {"use case: feed-forward pipeline", 2000,
       [](Check* c) { RunScenario("scenarios/pipeline.json", c); }},
      {"use case: guardrail graph", 2000,
       [](Check* c) { RunScenario("scenarios/guardrail.json", c); }},
      {"oracle equivalence", 60000, OracleEquivalence},
      {"invariant suite", 0, InvariantSuite},
      {"negative validation matrix", 0, NegativeMatrix},
  };
  int failed = 0;
  for (const auto& k : criteria) {
    Check c;
    auto start = Clock::now();
    k.run(&c);
    double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    if (k.budget_ms > 0 && ms > k.budget_ms) {
      c.Expect(false, "took " + std::to_string(ms) + " ms, budget " +
                          std::to_string(k.budget_ms) + " ms");
    }
    char timing[64];
    std::snprintf(timing, sizeof(timing), "%.1f ms", ms);
    if (c.ok()) {
      std::cout << "PASS " << k.name << " (" << timing << ")\n";
    } else {
      ++failed;
      std::cout << "FAIL " << k.name << " (" << timing << "): " << c.Summary() << "\n";
    }
    std::cout.flush();
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " failed")
            << "\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace mica

int main() { return mica::Main(); }
