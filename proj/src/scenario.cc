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

#include "mica/scenario.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "mica/attestation.h"
#include "mica/digest.h"

namespace mica {
namespace {

using json::Value;

Status ParseError(const std::string& path, std::string_view what) {
  return Error(ErrorCode::kScenarioParseError, path + ": " + std::string(what));
}

bool AsInt(const Value& v, int64_t* out) {
  if (v.is_int()) {
    *out = v.integer;
    return true;
  }
  if (!v.is_string() || v.str.empty()) return false;
  auto r = json::Parse(v.str);
  if (!r.ok() || !r->is_int()) return false;
  *out = r->integer;
  return true;
}

// Optional integer member; `fallback` when absent.
bool IntArg(const Value& obj, std::string_view key, int64_t fallback,
            int64_t* out) {
  const Value* v = obj.Find(key);
  if (v == nullptr) {
    *out = fallback;
    return true;
  }
  return AsInt(*v, out);
}

std::string StringArg(const Value& obj, std::string_view key,
                      std::string fallback = {}) {
  const Value* v = obj.Find(key);
  return v != nullptr && v->is_string() ? v->str : fallback;
}

bool BoolArg(const Value& obj, std::string_view key, bool fallback) {
  const Value* v = obj.Find(key);
  return v != nullptr && v->is_bool() ? v->boolean : fallback;
}

std::string Lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string ErrorOutcome(const Status& st) {
  return "error:" + std::string(ErrorCodeName(st.code()));
}

std::string MemoryOutcome(const Status& st) {
  if (st.ok()) return "ok";
  if (st.code() == ErrorCode::kFault) return "fault";
  return ErrorOutcome(st);
}

const std::vector<std::string> kOps = {
    "upload_policy", "realm_write", "realm_read",     "realm_copy",
    "realm_exit",    "host_read",   "host_write",     "attest",
    "verify",        "terminate",   "map_shared",     "expect_flow",
    "expect_channel", "expect_state"};

}  // namespace

Bytes RealmPattern(RealmId r, size_t len) {
  Bytes out(len);
  for (size_t i = 0; i < len; ++i) {
    out[i] = static_cast<uint8_t>(r.gid >> (8 * (i % 8)));
  }
  return out;
}

Digest NonceFromText(std::string_view text) {
  Digest d;
  if (text.size() == 64 && ParseDigestHex(text, &d)) return d;
  return Sha256Builder().Update("mica-nonce").Update(text).Finish();
}

bool OutcomeMatches(std::string_view expected, std::string_view outcome) {
  if (expected == outcome) return true;
  if (expected == "terminated") return outcome.starts_with("terminated");
  if (expected == "rejected") return outcome.starts_with("error:");
  return false;
}

// --- parsing ----------------------------------------------------------------

StatusOr<Scenario> ParseScenario(std::string_view text) {
  auto parsed = json::Parse(text);
  if (!parsed.ok()) {
    return Error(ErrorCode::kScenarioParseError, parsed.status().message());
  }
  const Value& doc = *parsed;
  if (!doc.is_object()) return ParseError("$", "expected an object");
  Scenario s;
  s.name = StringArg(doc, "name", "unnamed");
  s.seed = StringArg(doc, "seed", s.name);
  int64_t granules;
  if (!IntArg(doc, "granules", kDefaultGranuleCount, &granules) || granules <= 0) {
    return ParseError("granules", "expected a positive integer");
  }
  s.granules = static_cast<uint64_t>(granules);
  s.check_oracle = BoolArg(doc, "oracle", true);
  s.check_confinement = BoolArg(doc, "confinement", true);

  if (const Value* pols = doc.Find("policies")) {
    if (!pols->is_object()) return ParseError("policies", "expected an object");
    for (const auto& [k, v] : pols->members) s.policies[k] = v;
  }

  std::set<std::string> realm_names;
  const Value* realms = doc.Find("realms");
  if (realms == nullptr || !realms->is_array()) {
    return ParseError("realms", "expected an array");
  }
  for (size_t i = 0; i < realms->items.size(); ++i) {
    const Value& rv = realms->items[i];
    std::string path = "realms[" + std::to_string(i) + "]";
    if (!rv.is_object()) return ParseError(path, "expected an object");
    ScenarioRealm r;
    r.name = StringArg(rv, "name");
    if (r.name.empty() || r.name == "host") return ParseError(path + ".name", "invalid");
    if (!realm_names.insert(r.name).second) {
      return ParseError(path + ".name", "duplicate realm " + r.name);
    }
    std::string image = StringArg(rv, "image", "image:" + r.name);
    r.image.assign(image.begin(), image.end());
    int64_t priv;
    if (!IntArg(rv, "private", 2, &priv) || priv < 0) {
      return ParseError(path + ".private", "expected a granule count");
    }
    r.private_granules = static_cast<size_t>(priv);
    if (const Value* pol = rv.Find("policy")) {
      if (pol->is_object()) {
        r.policy_doc = *pol;
      } else if (pol->is_string()) {
        if (s.policies.count(pol->str) == 0) {
          return ParseError(path + ".policy", "unknown policy " + pol->str);
        }
        r.policy_ref = pol->str;
      } else {
        return ParseError(path + ".policy", "expected an object or a name");
      }
    }
    r.self_override = StringArg(rv, "self");
    s.realms.push_back(std::move(r));
  }

  std::set<std::string> object_names;
  if (const Value* objs = doc.Find("objects")) {
    if (!objs->is_array()) return ParseError("objects", "expected an array");
    for (size_t i = 0; i < objs->items.size(); ++i) {
      const Value& ov = objs->items[i];
      std::string path = "objects[" + std::to_string(i) + "]";
      ScenarioObject o;
      o.name = StringArg(ov, "name");
      if (o.name.empty() || !object_names.insert(o.name).second) {
        return ParseError(path + ".name", "missing or duplicate");
      }
      if (!ParseSlotAttribute(StringArg(ov, "attr", "PRIVATE_SHARED"),
                              &o.attribute) ||
          o.attribute == SlotAttribute::kPrivate) {
        return ParseError(path + ".attr", "expected PRIVATE_SHARED or SHARED");
      }
      int64_t size;
      if (!IntArg(ov, "size", kGranuleSize, &size) || size <= 0 ||
          size % kGranuleSize != 0) {
        return ParseError(path + ".size", "expected a multiple of 4096");
      }
      o.size = static_cast<uint64_t>(size);
      s.objects.push_back(std::move(o));
    }
  }

  if (const Value* slots = doc.Find("slots")) {
    if (!slots->is_array()) return ParseError("slots", "expected an array");
    for (size_t i = 0; i < slots->items.size(); ++i) {
      const Value& sv = slots->items[i];
      std::string path = "slots[" + std::to_string(i) + "]";
      ScenarioSlot sl;
      sl.realm = StringArg(sv, "realm");
      sl.object = StringArg(sv, "object");
      if (realm_names.count(sl.realm) == 0) {
        return ParseError(path + ".realm", "undeclared realm " + sl.realm);
      }
      if (object_names.count(sl.object) == 0) {
        return ParseError(path + ".object", "undeclared object " + sl.object);
      }
      int64_t ipa;
      if (sv.Find("ipa") == nullptr || !IntArg(sv, "ipa", 0, &ipa) || ipa < 0) {
        return ParseError(path + ".ipa", "expected an address");
      }
      sl.ipa = static_cast<uint64_t>(ipa);
      if (!Rights::Parse(StringArg(sv, "prot", "RW"), &sl.rights)) {
        return ParseError(path + ".prot", "expected a subset of RWX");
      }
      s.slots.push_back(std::move(sl));
    }
  }

  if (const Value* acts = doc.Find("actions")) {
    if (!acts->is_array()) return ParseError("actions", "expected an array");
    for (size_t i = 0; i < acts->items.size(); ++i) {
      const Value& av = acts->items[i];
      std::string path = "actions[" + std::to_string(i) + "]";
      if (!av.is_object()) return ParseError(path, "expected an object");
      ScenarioAction a;
      a.index = i;
      a.op = StringArg(av, "do");
      if (std::find(kOps.begin(), kOps.end(), a.op) == kOps.end()) {
        return ParseError(path + ".do", "unknown action '" + a.op + "'");
      }
      for (const char* key : {"realm", "from", "to"}) {
        std::string who = StringArg(av, key);
        if (!who.empty() && who != "host" && realm_names.count(who) == 0) {
          return ParseError(path + "." + key, "undeclared realm " + who);
        }
      }
      std::string obj = StringArg(av, "object");
      if (!obj.empty() && object_names.count(obj) == 0) {
        return ParseError(path + ".object", "undeclared object " + obj);
      }
      if (const Value* e = av.Find("expect")) {
        if (!e->is_string()) return ParseError(path + ".expect", "expected a string");
        a.expect = e->str;
      }
      a.args = av;
      s.actions.push_back(std::move(a));
    }
  }
  if (const Value* exp = doc.Find("expect")) {
    if (!exp->is_array()) return ParseError("expect", "expected an array");
    for (size_t i = 0; i < exp->items.size(); ++i) {
      const Value& ev = exp->items[i];
      std::string path = "expect[" + std::to_string(i) + "]";
      int64_t idx;
      if (ev.Find("action") == nullptr || !IntArg(ev, "action", 0, &idx) ||
          idx < 0 || static_cast<size_t>(idx) >= s.actions.size()) {
        return ParseError(path + ".action", "expected an action index");
      }
      std::string outcome = StringArg(ev, "outcome");
      if (outcome.empty()) return ParseError(path + ".outcome", "missing");
      s.actions[idx].expect = outcome;
    }
  }
  return s;
}

StatusOr<Scenario> LoadScenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return Error(ErrorCode::kIoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseScenario(ss.str());
}

// --- report -----------------------------------------------------------------

bool ScenarioReport::passed() const {
  if (!setup_error.empty()) return false;
  for (const auto& s : steps) {
    if (!s.passed) return false;
  }
  return oracle_agrees && confinement_violations.empty();
}

json::Value ScenarioReport::ToJson() const {
  Value out = Value::Object();
  out.Add("scenario", Value::String(name));
  out.Add("seed", Value::String(seed));
  out.Add("passed", Value::Bool(passed()));
  if (!setup_error.empty()) out.Add("setup_error", Value::String(setup_error));
  Value& realms = out.Add("realms", Value::Object());
  for (const auto& [n, gid] : realm_gids) {
    realms.Add(n, Value::Int(static_cast<int64_t>(gid)));
  }
  Value& steps_json = out.Add("steps", Value::Array());
  for (const auto& s : steps) {
    Value v = Value::Object();
    v.Add("index", Value::Int(static_cast<int64_t>(s.index)));
    v.Add("do", Value::String(s.op));
    v.Add("outcome", Value::String(s.outcome));
    if (s.expected) v.Add("expect", Value::String(*s.expected));
    v.Add("passed", Value::Bool(s.passed));
    if (!s.detail.empty()) v.Add("detail", Value::String(s.detail));
    steps_json.Push(std::move(v));
  }
  out.Add("flows", oracle.ToJson());
  if (oracle_checked) {
    out.Add("oracle_agrees", Value::Bool(oracle_agrees));
    Value& dis = out.Add("oracle_disagreements", Value::Array());
    for (const auto& d : oracle_disagreements) dis.Push(Value::String(d));
  }
  if (confinement_checked) {
    Value& conf = out.Add("confinement_violations", Value::Array());
    for (const auto& c : confinement_violations) conf.Push(Value::String(c));
  }
  return out;
}

// --- runner -----------------------------------------------------------------

ScenarioRunner::ScenarioRunner(Scenario scenario)
    : scenario_(std::move(scenario)) {}

std::optional<RealmId> ScenarioRunner::RealmByName(const std::string& name) const {
  auto it = realm_ids_.find(name);
  if (it == realm_ids_.end()) return std::nullopt;
  return it->second;
}

std::string ScenarioRunner::RealmName(RealmId r) const {
  if (r == kHostSink) return "host";
  for (const auto& [n, id] : realm_ids_) {
    if (id == r) return n;
  }
  return std::to_string(r.gid);
}

Status ScenarioRunner::Setup() {
  signer_ = KeyedDigestSigner::FromSeed(scenario_.seed);
  PlatformConfig config;
  config.granule_count = scenario_.granules;
  config.signer = signer_;
  platform_ = std::make_unique<Platform>(config);
  vmm_ = std::make_unique<Vmm>(platform_.get());
  realm_ids_.clear();
  objects_.clear();
  tokens_.clear();
  token_nonces_.clear();
  for (const auto& r : scenario_.realms) {
    auto id = vmm_->LaunchRealm(r.image, r.private_granules);
    if (!id.ok()) {
      return Error(id.code(), "launching " + r.name + ": " + id.status().message());
    }
    realm_ids_[r.name] = *id;
  }
  for (const auto& o : scenario_.objects) {
    auto backing = vmm_->CreateObject(o.attribute, o.size / kGranuleSize);
    if (!backing.ok()) {
      return Error(backing.code(), "object " + o.name + ": " + backing.status().message());
    }
    objects_[o.name] = std::move(backing).value();
  }
  for (const auto& sl : scenario_.slots) {
    SlotAttribute attr = std::find_if(scenario_.objects.begin(),
                                      scenario_.objects.end(),
                                      [&](const ScenarioObject& o) {
                                        return o.name == sl.object;
                                      })->attribute;
    Status st = vmm_->AddSlot(realm_ids_.at(sl.realm), sl.ipa, attr,
                              objects_.at(sl.object), sl.rights);
    if (!st.ok()) {
      return Error(st.code(), "slot " + sl.object + " in " + sl.realm + ": " +
                                  st.message());
    }
  }
  return Status::Ok();
}

StatusOr<RealmId> ScenarioRunner::NeedRealm(const Value& args,
                                            const char* key) const {
  std::string name = StringArg(args, key);
  auto id = RealmByName(name);
  if (!id) return Error(ErrorCode::kInvalidArgument, "no realm '" + name + "'");
  return *id;
}

namespace {

Status SubstituteRims(Value* v, const ScenarioRunner& runner) {
  if (v->is_string() && v->str.starts_with("rim:")) {
    std::string name = v->str.substr(4);
    auto id = runner.RealmByName(name);
    if (!id) return ParseError(v->str, "unknown realm in RIM placeholder");
    v->str = HexEncode(runner.const_platform().realm(*id)->rim);
    return Status::Ok();
  }
  for (auto& item : v->items) MICA_RETURN_IF_ERROR(SubstituteRims(&item, runner));
  for (auto& [k, m] : v->members) MICA_RETURN_IF_ERROR(SubstituteRims(&m, runner));
  return Status::Ok();
}

// Points Self at `self`. When `self` is not yet a declared peer, the old
// Self id is renamed to it throughout the document.
void ApplySelfOverride(Value* doc, const std::string& self) {
  Value* peers = nullptr;
  for (auto& [k, v] : doc->members) {
    if (k == "Peers") peers = &v;
  }
  if (peers == nullptr) return;
  std::string old;
  bool declared = false;
  for (auto& [k, v] : peers->members) {
    if (k == "Self" && v.is_string()) old = v.str;
    if (k == self) declared = true;
  }
  for (auto& [k, v] : peers->members) {
    if (k == "Self") v = Value::String(self);
  }
  if (declared || old.empty()) return;
  auto rename = [&](std::string* key) {
    if (*key == old) *key = self;
  };
  for (auto& [k, v] : peers->members) rename(&k);
  for (auto& [section, body] : doc->members) {
    if (section == "MemChannels") {
      for (auto& [name, ch] : body.members) {
        for (auto& [field, maps] : ch.members) {
          if (field != "mappings") continue;
          for (auto& [who, m] : maps.members) rename(&who);
        }
      }
    } else if (section == "TransChannels") {
      for (auto& [name, tc] : body.members) {
        for (auto& [field, v] : tc.members) {
          if (field == "owner" && v.is_string()) rename(&v.str);
        }
      }
    }
  }
}

}  // namespace

StatusOr<Bytes> ScenarioRunner::PolicyBlobFor(const std::string& realm,
                                              const std::string& policy_ref) const {
  auto it = std::find_if(scenario_.realms.begin(), scenario_.realms.end(),
                         [&](const ScenarioRealm& r) { return r.name == realm; });
  if (it == scenario_.realms.end()) {
    return Error(ErrorCode::kInvalidArgument, "no realm '" + realm + "'");
  }
  Value doc;
  if (!policy_ref.empty()) {
    auto p = scenario_.policies.find(policy_ref);
    if (p == scenario_.policies.end()) {
      return Error(ErrorCode::kInvalidArgument, "no policy '" + policy_ref + "'");
    }
    doc = p->second;
  } else if (it->policy_doc) {
    doc = *it->policy_doc;
  } else if (!it->policy_ref.empty()) {
    doc = scenario_.policies.at(it->policy_ref);
  } else {
    return Error(ErrorCode::kInvalidArgument, realm + " has no policy");
  }
  MICA_RETURN_IF_ERROR(SubstituteRims(&doc, *this));
  if (!it->self_override.empty()) ApplySelfOverride(&doc, it->self_override);
  MICA_ASSIGN_OR_RETURN(PolicyConfig config, PolicyFromJson(doc, StructureCheck::kAsUploaded));
  return EncodePolicy(config);
}

std::string ScenarioRunner::RunUpload(const Value& args, std::string* detail) {
  auto r = NeedRealm(args, "realm");
  if (!r.ok()) return ErrorOutcome(r.status());
  auto blob = PolicyBlobFor(StringArg(args, "realm"), StringArg(args, "policy"));
  if (!blob.ok()) {
    *detail = blob.status().ToString();
    return ErrorOutcome(blob.status());
  }
  Bytes bytes = std::move(blob).value();
  if (BoolArg(args, "corrupt", false)) bytes[0] ^= 0xff;
  Status st = GuestUploadPolicy(platform_.get(), *r, bytes);
  if (st.ok()) return "ok";
  *detail = st.ToString();
  const Realm* realm = platform_->realm(*r);
  if (realm != nullptr && !realm->alive()) {
    return "terminated:" + realm->termination_reason;
  }
  return ErrorOutcome(st);
}

StatusOr<Bytes> ScenarioRunner::RetrieveToken(RealmId r, const Digest& nonce) {
  constexpr size_t kChunk = 1024;
  uint64_t buffer = platform_->config().private_ipa_base;
  MICA_ASSIGN_OR_RETURN(size_t size, platform_->RsiAttestTokenInitGroup(r, nonce));
  Bytes token;
  while (true) {
    MICA_ASSIGN_OR_RETURN(size_t n,
                          platform_->RsiAttestTokenContinueGroup(r, buffer, kChunk));
    if (n == 0) break;
    MICA_ASSIGN_OR_RETURN(Bytes chunk, platform_->RealmRead(r, buffer, n));
    token.insert(token.end(), chunk.begin(), chunk.end());
  }
  if (token.size() != size) {
    return Error(ErrorCode::kMalformedToken, "short retrieval");
  }
  return token;
}

std::string ScenarioRunner::RunAttest(const Value& args, std::string* detail) {
  auto r = NeedRealm(args, "realm");
  if (!r.ok()) return ErrorOutcome(r.status());
  if (BoolArg(args, "export", false)) {
    // Only gateways may carry a token off the platform.
    const Realm* realm = platform_->realm(*r);
    if (realm == nullptr || !realm->committed() ||
        !realm->policy->self()->is_gateway) {
      *detail = "only gateways may export attestation tokens";
      return "refused";
    }
  }
  Digest nonce = NonceFromText(StringArg(args, "nonce", "nonce"));
  auto token = RetrieveToken(*r, nonce);
  if (!token.ok()) {
    *detail = token.status().ToString();
    return ErrorOutcome(token.status());
  }
  tokens_.push_back(*token);
  token_nonces_.push_back(nonce);
  if (const Value* group = args.Find("group")) {
    std::set<RealmId> want;
    for (const auto& g : group->items) {
      if (auto id = RealmByName(g.str)) want.insert(*id);
    }
    auto got_vec = platform_->GroupOf(*r);
    std::set<RealmId> got(got_vec.begin(), got_vec.end());
    if (want != got) {
      *detail = "group has " + std::to_string(got.size()) + " members";
      return "group-mismatch";
    }
  }
  *detail = std::to_string(token->size()) + " bytes";
  return "ok";
}

std::string ScenarioRunner::RunVerify(const Value& args, std::string* detail) {
  if (tokens_.empty()) return "error:NoStagedToken";
  int64_t idx;
  if (!IntArg(args, "token", static_cast<int64_t>(tokens_.size()) - 1, &idx) ||
      idx < 0 || static_cast<size_t>(idx) >= tokens_.size()) {
    return "error:InvalidArgument";
  }
  Bytes token = tokens_[idx];
  Digest nonce = args.Find("nonce") != nullptr
                     ? NonceFromText(StringArg(args, "nonce"))
                     : token_nonces_[idx];
  std::string tamper = StringArg(args, "tamper");
  if (!tamper.empty()) {
    auto t = GroupToken::Decode(token);
    if (!t.ok()) return ErrorOutcome(t.status());
    if (tamper == "policy_blob") {
      for (auto& rec : t->records) {
        if (!rec.policy_blob.empty()) {
          rec.policy_blob[rec.policy_blob.size() / 2] ^= 1;
          break;
        }
      }
    } else if (tamper == "activity") {
      for (auto& rec : t->records) {
        if (!rec.channels.empty()) {
          rec.channels[0].active = !rec.channels[0].active;
          break;
        }
      }
      // Re-seal so only the activity inconsistency remains.
      token = SealGroupToken(*t, *signer_);
      t = GroupToken::Decode(token);
    } else if (tamper == "signature") {
      t->signature[0] ^= 1;
    } else {
      return "error:InvalidArgument";
    }
    token = t->Encode();
  }
  std::shared_ptr<KeyedDigestSigner> anchor = signer_;
  if (args.Find("anchor_seed") != nullptr) {
    anchor = KeyedDigestSigner::FromSeed(StringArg(args, "anchor_seed"));
  }
  auto verified = VerifyGroupToken(token, *anchor, nonce);
  if (!verified.ok()) {
    *detail = verified.status().ToString();
    return ErrorOutcome(verified.status());
  }
  if (const Value* members = args.Find("members")) {
    std::set<uint64_t> want, got;
    for (const auto& m : members->items) {
      if (auto id = RealmByName(m.str)) want.insert(id->gid);
    }
    for (const auto& vr : verified->realms) got.insert(vr.gid);
    if (want != got) return "members-mismatch";
  }
  size_t active = 0;
  for (const auto& ch : verified->channels) active += ch.active ? 1 : 0;
  *detail = std::to_string(verified->realms.size()) + " realms, " +
            std::to_string(active) + " active channels";
  return "ok";
}

StepResult ScenarioRunner::Step(const ScenarioAction& action) {
  StepResult res;
  res.index = action.index;
  res.op = action.op;
  res.expected = action.expect;
  const Value& a = action.args;
  std::string& out = res.outcome;

  auto realm_arg = [&](const char* key) { return NeedRealm(a, key); };
  auto int_arg = [&](const char* key, int64_t fallback) {
    int64_t v = fallback;
    IntArg(a, key, fallback, &v);
    return v;
  };

  if (action.op == "upload_policy") {
    out = RunUpload(a, &res.detail);
  } else if (action.op == "realm_write") {
    auto r = realm_arg("realm");
    if (!r.ok()) {
      out = ErrorOutcome(r.status());
    } else {
      Bytes data = RealmPattern(*r, static_cast<size_t>(int_arg("len", 64)));
      out = MemoryOutcome(platform_->RealmWrite(
          *r, static_cast<uint64_t>(int_arg("ipa", 0)), data));
    }
  } else if (action.op == "realm_read") {
    auto r = realm_arg("realm");
    if (!r.ok()) {
      out = ErrorOutcome(r.status());
    } else {
      size_t len = static_cast<size_t>(int_arg("len", 64));
      auto bytes = platform_->RealmRead(*r, static_cast<uint64_t>(int_arg("ipa", 0)), len);
      out = MemoryOutcome(bytes.status());
      if (bytes.ok() && a.Find("from") != nullptr) {
        auto src = realm_arg("from");
        if (src.ok() && *bytes != RealmPattern(*src, len)) out = "mismatch";
      }
    }
  } else if (action.op == "realm_copy") {
    auto r = realm_arg("realm");
    if (!r.ok()) {
      out = ErrorOutcome(r.status());
    } else {
      size_t len = static_cast<size_t>(int_arg("len", 64));
      auto bytes = platform_->RealmRead(*r, static_cast<uint64_t>(int_arg("src", 0)), len);
      if (!bytes.ok()) {
        out = MemoryOutcome(bytes.status());
      } else {
        out = MemoryOutcome(platform_->RealmWrite(
            *r, static_cast<uint64_t>(int_arg("dst", 0)), *bytes));
      }
    }
  } else if (action.op == "realm_exit") {
    auto r = realm_arg("realm");
    if (!r.ok()) {
      out = ErrorOutcome(r.status());
    } else {
      ExitEvent e;
      e.realm = *r;
      e.kind = Lower(StringArg(a, "kind", "call")) == "exception"
                   ? TransType::kException
                   : TransType::kCall;
      e.id = static_cast<uint64_t>(int_arg("id", 0));
      if (const Value* p = a.Find("payload")) {
        for (const auto& reg : p->items) {
          int64_t v = 0;
          AsInt(reg, &v);
          e.payload.push_back(static_cast<uint64_t>(v));
        }
      }
      FilterVerdict v = platform_->RealmExit(e);
      out = "verdict:" + std::string(FilterActionName(v.action));
      std::transform(out.begin() + 8, out.end(), out.begin() + 8, [](char c) {
        return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      });
      out[8] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[8])));
      if (v.delivered) {
        std::string regs;
        for (uint64_t x : *v.delivered) {
          if (!regs.empty()) regs += ",";
          regs += std::to_string(x);
        }
        res.detail = "delivered [" + regs + "]";
      }
    }
  } else if (action.op == "host_read" || action.op == "host_write") {
    auto obj = objects_.find(StringArg(a, "object"));
    int64_t index = int_arg("granule", 0);
    if (obj == objects_.end() || index < 0 ||
        static_cast<size_t>(index) >= obj->second.size()) {
      out = "error:InvalidArgument";
    } else {
      GranuleId g = obj->second[index];
      uint64_t offset = static_cast<uint64_t>(int_arg("offset", 0));
      size_t len = static_cast<size_t>(int_arg("len", 64));
      if (action.op == "host_write") {
        out = MemoryOutcome(platform_->HostWrite(g, offset, Bytes(len, 0xee)));
      } else {
        auto bytes = platform_->HostRead(g, offset, len);
        out = MemoryOutcome(bytes.status());
        if (bytes.ok() && a.Find("from") != nullptr) {
          auto src = realm_arg("from");
          if (src.ok() && *bytes != RealmPattern(*src, len)) out = "mismatch";
        }
      }
    }
  } else if (action.op == "attest") {
    out = RunAttest(a, &res.detail);
  } else if (action.op == "verify") {
    out = RunVerify(a, &res.detail);
  } else if (action.op == "terminate") {
    auto r = realm_arg("realm");
    if (!r.ok()) {
      out = ErrorOutcome(r.status());
    } else {
      platform_->TerminateRealm(*r, "Host");
      out = "ok";
    }
  } else if (action.op == "map_shared") {
    auto r = realm_arg("realm");
    auto obj = objects_.find(StringArg(a, "object"));
    if (!r.ok() || obj == objects_.end()) {
      out = "error:InvalidArgument";
    } else {
      SlotAttribute attr = SlotAttribute::kPrivateShared;
      for (const auto& o : scenario_.objects) {
        if (o.name == obj->first) attr = o.attribute;
      }
      Rights rights = Rights::RW();
      Rights::Parse(StringArg(a, "prot", "RW"), &rights);
      Status st = vmm_->AddSlot(*r, static_cast<uint64_t>(int_arg("ipa", 0)),
                                attr, obj->second, rights);
      out = st.ok() ? "ok" : ErrorOutcome(st);
      res.detail = st.ok() ? "" : st.ToString();
    }
  } else if (action.op == "expect_flow") {
    std::string from = StringArg(a, "from"), to = StringArg(a, "to");
    auto src = RealmByName(from);
    std::optional<RealmId> dst =
        to == "host" ? std::optional<RealmId>(kHostSink) : RealmByName(to);
    if (!src || !dst) {
      out = "error:InvalidArgument";
    } else {
      FlowMatrix m = ComputeFlowOracle(*platform_);
      out = m.Has(*src, *dst) ? "flow" : "no-flow";
    }
  } else if (action.op == "expect_channel") {
    auto r = realm_arg("realm");
    const Realm* realm = r.ok() ? platform_->realm(*r) : nullptr;
    const ChannelBinding* b =
        realm == nullptr ? nullptr : realm->FindBinding(StringArg(a, "channel"));
    if (b == nullptr) {
      out = "unbound";
    } else {
      bool active = b->type == ChannelType::kProtected;
      for (GranuleId pa : b->pas) active = active && platform_->RowActive(pa);
      out = active ? "active" : "inactive";
    }
  } else if (action.op == "expect_state") {
    auto r = realm_arg("realm");
    out = r.ok() ? std::string(RealmStateName(platform_->realm(*r)->state))
                 : ErrorOutcome(r.status());
  }

  if (action.expect) res.passed = OutcomeMatches(*action.expect, out);
  return res;
}

ScenarioReport ScenarioRunner::Run() {
  ScenarioReport report;
  report.name = scenario_.name;
  report.seed = scenario_.seed;
  if (Status st = Setup(); !st.ok()) {
    report.setup_error = st.ToString();
    return report;
  }
  for (const auto& [n, id] : realm_ids_) report.realm_gids[n] = id.gid;
  for (const auto& action : scenario_.actions) {
    report.steps.push_back(Step(action));
  }
  report.event_log = platform_->log().ToJsonLines();
  report.oracle = ComputeFlowOracle(*platform_);
  if (scenario_.check_oracle) {
    report.oracle_checked = true;
    report.derived = DeriveFlowMatrix(*platform_);
    for (const auto& d : report.oracle.Difference(report.derived)) {
      report.oracle_disagreements.push_back("oracle-only " + d);
    }
    for (const auto& d : report.derived.Difference(report.oracle)) {
      report.oracle_disagreements.push_back("derived-only " + d);
    }
    report.oracle_agrees = report.oracle_disagreements.empty();
  }
  if (scenario_.check_confinement) {
    report.confinement_checked = true;
    for (const auto& [n, id] : realm_ids_) {
      const Realm* realm = platform_->realm(id);
      bool gateway = realm->committed() && realm->policy->self()->is_gateway;
      if (!gateway && report.oracle.ToHost(id)) {
        report.confinement_violations.push_back(n + "->host");
      }
    }
  }
  return report;
}

}  // namespace mica
