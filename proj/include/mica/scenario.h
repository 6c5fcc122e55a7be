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

// Declarative scenarios: realms, host memory objects and slots, policies,
// and an ordered list of actions with expected outcomes. The schema is
// described in docs/scenario.md.

#ifndef MICA_SCENARIO_H_
#define MICA_SCENARIO_H_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mica/flow_oracle.h"
#include "mica/host.h"
#include "mica/monitor.h"
#include "mica/relaxed_json.h"

namespace mica {

struct ScenarioRealm {
  std::string name;
  Bytes image;
  size_t private_granules = 2;
  // Inline policy document, or the name of a shared one in `policies`.
  std::optional<json::Value> policy_doc;
  std::string policy_ref;
  std::string self_override;
};

struct ScenarioObject {
  std::string name;
  SlotAttribute attribute = SlotAttribute::kPrivateShared;
  uint64_t size = kGranuleSize;
};

struct ScenarioSlot {
  std::string realm;
  std::string object;
  uint64_t ipa = 0;
  Rights rights = Rights::RW();
};

struct ScenarioAction {
  size_t index = 0;
  std::string op;
  json::Value args;
  std::optional<std::string> expect;
};

struct Scenario {
  std::string name;
  std::string seed = "mica";
  uint64_t granules = kDefaultGranuleCount;
  std::vector<ScenarioRealm> realms;
  std::vector<ScenarioObject> objects;
  std::vector<ScenarioSlot> slots;
  std::map<std::string, json::Value> policies;
  std::vector<ScenarioAction> actions;
  bool check_oracle = true;
  bool check_confinement = true;
};

// Errors: ScenarioParseError (with the offending path).
StatusOr<Scenario> ParseScenario(std::string_view text);
StatusOr<Scenario> LoadScenario(const std::string& path);

struct StepResult {
  size_t index = 0;
  std::string op;
  std::string outcome;
  std::optional<std::string> expected;
  bool passed = true;
  std::string detail;
};

struct ScenarioReport {
  std::string name;
  std::string seed;
  std::vector<StepResult> steps;
  std::string event_log;
  FlowMatrix oracle;
  FlowMatrix derived;
  bool oracle_checked = false;
  bool oracle_agrees = true;
  std::vector<std::string> oracle_disagreements;
  bool confinement_checked = false;
  std::vector<std::string> confinement_violations;
  std::map<std::string, uint64_t> realm_gids;
  std::string setup_error;

  bool passed() const;
  json::Value ToJson() const;
};

// True when `outcome` satisfies `expected`. "terminated" and "rejected"
// match any reason; everything else must match exactly.
bool OutcomeMatches(std::string_view expected, std::string_view outcome);

class ScenarioRunner {
 public:
  explicit ScenarioRunner(Scenario scenario);

  // Builds a fresh platform with the scenario's realms, objects and slots.
  Status Setup();
  // Runs one action and records its result.
  StepResult Step(const ScenarioAction& action);
  // Setup, every action, then the final flow checks.
  ScenarioReport Run();

  Platform& platform() { return *platform_; }
  const Platform& const_platform() const { return *platform_; }
  const Scenario& scenario() const { return scenario_; }
  std::optional<RealmId> RealmByName(const std::string& name) const;
  std::string RealmName(RealmId r) const;
  // Encoded policy for a scenario realm, with RIM placeholders resolved.
  // Parsed as uploaded, so a policy the monitor must refuse still encodes.
  StatusOr<Bytes> PolicyBlobFor(const std::string& realm,
                                const std::string& policy_ref = {}) const;
  const std::vector<Bytes>& tokens() const { return tokens_; }
  const KeyedDigestSigner& signer() const { return *signer_; }
  // Backing granules of each scenario object.
  const std::map<std::string, std::vector<GranuleId>>& objects() const {
    return objects_;
  }
  // Fetches r's group token through the RSI calls in 1024-byte chunks via
  // the start of r's private memory.
  StatusOr<Bytes> RetrieveToken(RealmId r, const Digest& nonce);

 private:
  StatusOr<RealmId> NeedRealm(const json::Value& args, const char* key) const;
  std::string RunUpload(const json::Value& args, std::string* detail);
  std::string RunAttest(const json::Value& args, std::string* detail);
  std::string RunVerify(const json::Value& args, std::string* detail);

  Scenario scenario_;
  std::shared_ptr<KeyedDigestSigner> signer_;
  std::unique_ptr<Platform> platform_;
  std::unique_ptr<Vmm> vmm_;
  std::map<std::string, RealmId> realm_ids_;
  std::map<std::string, std::vector<GranuleId>> objects_;
  std::vector<Bytes> tokens_;
  std::vector<Digest> token_nonces_;
};

// Bytes a realm writes in scenarios: its gid, little-endian, repeated.
Bytes RealmPattern(RealmId r, size_t len);
// 32-byte nonce from a hex string (64 digits) or by hashing free text.
Digest NonceFromText(std::string_view text);

}  // namespace mica

#endif  // MICA_SCENARIO_H_
