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

// Human-readable policy documents. Key names follow the published example
// format: "Peers" (with "Self"), "MemChannels", "TransChannels".

#include <algorithm>
#include <cctype>
#include <set>

#include "mica/policy.h"

namespace mica {
namespace {

using json::Value;

Status Schema(const std::string& path, std::string_view what) {
  return Error(ErrorCode::kSchemaError, path + ": " + std::string(what));
}

std::string Upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// Integers may be written as numbers or as decimal/hex strings ("1", "0x10").
bool ReadInt(const Value& v, int64_t* out) {
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

Status ReadUnsigned(const Value& v, const std::string& path, uint64_t* out) {
  int64_t i;
  if (!ReadInt(v, &i) || i < 0) return Schema(path, "expected a non-negative integer");
  *out = static_cast<uint64_t>(i);
  return Status::Ok();
}

Status ReadBool(const Value* v, const std::string& path, bool* out) {
  if (v == nullptr) return Status::Ok();
  if (!v->is_bool()) return Schema(path, "expected true or false");
  *out = v->boolean;
  return Status::Ok();
}

Status CheckKeys(const Value& obj, const std::string& path,
                 std::initializer_list<std::string_view> allowed) {
  for (const auto& [k, v] : obj.members) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      return Schema(path + "." + k, "unknown key");
    }
  }
  std::set<std::string_view> seen;
  for (const auto& [k, v] : obj.members) {
    if (!seen.insert(k).second) return Schema(path + "." + k, "duplicate key");
  }
  return Status::Ok();
}

// A full 64-digit hex string, or a short integer that abbreviates a digest
// (right-aligned, big-endian).
Status ReadHash(const Value& v, const std::string& path, Digest* out) {
  if (v.is_string()) {
    if (!ParseDigestHex(v.str, out)) {
      return Schema(path, "expected a 32-byte hex digest");
    }
    return Status::Ok();
  }
  if (v.is_int() && v.integer >= 0) {
    out->fill(0);
    uint64_t x = static_cast<uint64_t>(v.integer);
    for (int i = 31; i >= 24; --i) {
      (*out)[i] = static_cast<uint8_t>(x & 0xff);
      x >>= 8;
    }
    return Status::Ok();
  }
  return Schema(path, "expected a digest");
}

Status ParsePeers(const Value& peers, PolicyConfig* out) {
  if (!peers.is_object()) return Schema("Peers", "expected an object");
  std::set<std::string> ids;
  for (const auto& [key, v] : peers.members) {
    std::string path = "Peers." + key;
    if (key == "Self") {
      if (!out->self_id.empty()) return Schema(path, "duplicate key");
      if (!v.is_string()) return Schema(path, "expected a local id");
      out->self_id = v.str;
      continue;
    }
    if (!ids.insert(key).second) return Error(ErrorCode::kDuplicatePeer, key);
    if (!v.is_object()) return Schema(path, "expected an object");
    MICA_RETURN_IF_ERROR(CheckKeys(v, path, {"hash", "is_gateway", "strict"}));
    PeerSpec spec;
    spec.local_id = key;
    if (const Value* h = v.Find("hash"); h != nullptr && h->kind != Value::Kind::kNull) {
      Digest d;
      MICA_RETURN_IF_ERROR(ReadHash(*h, path + ".hash", &d));
      spec.expected_rim = d;
    }
    MICA_RETURN_IF_ERROR(ReadBool(v.Find("is_gateway"), path + ".is_gateway",
                                  &spec.is_gateway));
    MICA_RETURN_IF_ERROR(ReadBool(v.Find("strict"), path + ".strict", &spec.strict));
    out->peers.push_back(std::move(spec));
  }
  if (out->self_id.empty()) return Schema("Peers.Self", "missing");
  return Status::Ok();
}

std::string ResolveWho(const std::string& who, const PolicyConfig& p) {
  return who == "SELF" ? p.self_id : who;
}

Status ParseMemChannels(const Value& chans, PolicyConfig* out) {
  if (!chans.is_object()) return Schema("MemChannels", "expected an object");
  for (const auto& [name, v] : chans.members) {
    std::string path = "MemChannels." + name;
    if (!v.is_object()) return Schema(path, "expected an object");
    MICA_RETURN_IF_ERROR(CheckKeys(v, path, {"size", "type", "mappings"}));
    MemChannelSpec ch;
    ch.name = name;
    const Value* size = v.Find("size");
    if (size == nullptr) return Schema(path + ".size", "missing");
    MICA_RETURN_IF_ERROR(ReadUnsigned(*size, path + ".size", &ch.size));
    const Value* type = v.Find("type");
    if (type == nullptr || !type->is_string()) {
      return Schema(path + ".type", "expected PROTECTED or UNPROTECTED");
    }
    std::string t = Upper(type->str);
    if (t == "PROTECTED") {
      ch.type = ChannelType::kProtected;
    } else if (t == "UNPROTECTED") {
      ch.type = ChannelType::kUnprotected;
    } else {
      return Schema(path + ".type", "expected PROTECTED or UNPROTECTED");
    }
    const Value* maps = v.Find("mappings");
    if (maps == nullptr || !maps->is_object()) {
      return Schema(path + ".mappings", "expected an object");
    }
    std::set<std::string> seen;
    for (const auto& [who_raw, m] : maps->members) {
      std::string mpath = path + ".mappings." + who_raw;
      if (!m.is_object()) return Schema(mpath, "expected an object");
      MICA_RETURN_IF_ERROR(CheckKeys(m, mpath, {"gpa", "prot", "count"}));
      MappingSpec spec;
      spec.any = Upper(who_raw) == "ANY";
      if (!spec.any) spec.who = ResolveWho(who_raw, *out);
      if (!seen.insert(spec.any ? std::string("\x01ANY") : spec.who).second) {
        return Error(ErrorCode::kDuplicateMapping, mpath);
      }
      if (!spec.any && out->FindPeer(spec.who) == nullptr) {
        return Schema(mpath, "unknown peer");
      }
      if (const Value* gpa = m.Find("gpa")) {
        uint64_t g = 0;
        MICA_RETURN_IF_ERROR(ReadUnsigned(*gpa, mpath + ".gpa", &g));
        spec.gpa = g;
      }
      const Value* prot = m.Find("prot");
      if (prot == nullptr || !prot->is_string() ||
          !Rights::Parse(prot->str, &spec.prot)) {
        return Schema(mpath + ".prot", "expected a subset of \"RWX\"");
      }
      if (const Value* count = m.Find("count")) {
        if (!spec.any) return Schema(mpath + ".count", "only valid for ANY");
        if (!ReadInt(*count, &spec.count)) {
          return Schema(mpath + ".count", "expected an integer");
        }
        if (spec.count == 0) {
          return Schema(mpath + ".count", "zero admits nobody");
        }
      } else if (spec.any) {
        spec.count = -1;
      }
      ch.mappings.push_back(std::move(spec));
    }
    out->mem_channels.push_back(std::move(ch));
  }
  return Status::Ok();
}

Status ParseTransChannels(const Value& chans, PolicyConfig* out) {
  if (!chans.is_object()) return Schema("TransChannels", "expected an object");
  for (const auto& [name, v] : chans.members) {
    std::string path = "TransChannels." + name;
    if (!v.is_object()) return Schema(path, "expected an object");
    MICA_RETURN_IF_ERROR(
        CheckKeys(v, path, {"owner", "type", "range", "policy"}));
    TransChannelSpec tc;
    tc.name = name;
    const Value* owner = v.Find("owner");
    if (owner == nullptr || !owner->is_string()) {
      return Schema(path + ".owner", "expected a local id");
    }
    tc.owner = ResolveWho(owner->str, *out);
    const Value* type = v.Find("type");
    std::string t = type != nullptr && type->is_string() ? Upper(type->str) : "";
    if (t == "CALL") {
      tc.type = TransType::kCall;
    } else if (t == "EXCEPTION") {
      tc.type = TransType::kException;
    } else {
      return Schema(path + ".type", "expected call or exception");
    }
    const Value* range = v.Find("range");
    if (range == nullptr || !range->is_array()) {
      return Schema(path + ".range", "expected an array");
    }
    for (const auto& item : range->items) {
      uint64_t id;
      MICA_RETURN_IF_ERROR(ReadUnsigned(item, path + ".range", &id));
      tc.range.push_back(id);
    }
    if (tc.range.empty()) return Error(ErrorCode::kEmptyRange, path);
    const Value* pol = v.Find("policy");
    std::string a = pol != nullptr && pol->is_string() ? Upper(pol->str) : "";
    if (a == "ALLOW") {
      tc.action = FilterAction::kAllow;
    } else if (a == "SCRUB") {
      tc.action = FilterAction::kScrub;
    } else if (a == "BLOCK") {
      tc.action = FilterAction::kBlock;
    } else {
      return Schema(path + ".policy", "expected ALLOW, SCRUB or BLOCK");
    }
    out->trans_channels.push_back(std::move(tc));
  }
  return Status::Ok();
}

std::string HexAddr(uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  if (v == 0) return "0x0";
  std::string s;
  while (v) {
    s += kDigits[v & 0xf];
    v >>= 4;
  }
  std::reverse(s.begin(), s.end());
  return "0x" + s;
}

}  // namespace

StatusOr<PolicyConfig> PolicyFromJson(const json::Value& doc,
                                      StructureCheck mode) {
  if (!doc.is_object()) return Schema("$", "expected an object");
  MICA_RETURN_IF_ERROR(
      CheckKeys(doc, "$", {"Peers", "MemChannels", "TransChannels"}));
  PolicyConfig p;
  const Value* peers = doc.Find("Peers");
  if (peers == nullptr) return Schema("Peers", "missing");
  MICA_RETURN_IF_ERROR(ParsePeers(*peers, &p));
  if (const Value* mem = doc.Find("MemChannels")) {
    MICA_RETURN_IF_ERROR(ParseMemChannels(*mem, &p));
  }
  if (const Value* tr = doc.Find("TransChannels")) {
    MICA_RETURN_IF_ERROR(ParseTransChannels(*tr, &p));
  }
  Canonicalize(&p);
  MICA_RETURN_IF_ERROR(CheckPolicyStructure(p, mode));
  return p;
}

StatusOr<PolicyConfig> ParsePolicy(std::string_view text) {
  MICA_ASSIGN_OR_RETURN(json::Value doc, json::Parse(text));
  return PolicyFromJson(doc);
}

json::Value PolicyToJson(const PolicyConfig& p) {
  Value doc = Value::Object();
  Value& peers = doc.Add("Peers", Value::Object());
  peers.Add("Self", Value::String(p.self_id));
  for (const auto& peer : p.peers) {
    Value& e = peers.Add(peer.local_id, Value::Object());
    if (peer.expected_rim) e.Add("hash", Value::String(HexEncode(*peer.expected_rim)));
    e.Add("is_gateway", Value::Bool(peer.is_gateway));
    e.Add("strict", Value::Bool(peer.strict));
  }
  Value& mem = doc.Add("MemChannels", Value::Object());
  for (const auto& ch : p.mem_channels) {
    Value& c = mem.Add(ch.name, Value::Object());
    c.Add("size", Value::String(HexAddr(ch.size)));
    c.Add("type", Value::String(std::string(ChannelTypeName(ch.type))));
    Value& maps = c.Add("mappings", Value::Object());
    for (const auto& m : ch.mappings) {
      Value& e = maps.Add(m.any ? "ANY" : m.who, Value::Object());
      if (m.gpa) e.Add("gpa", Value::String(HexAddr(*m.gpa)));
      e.Add("prot", Value::String(m.prot.ToString()));
      if (m.any) e.Add("count", Value::Int(m.count));
    }
  }
  Value& trans = doc.Add("TransChannels", Value::Object());
  for (const auto& tc : p.trans_channels) {
    Value& c = trans.Add(tc.name, Value::Object());
    c.Add("owner", Value::String(tc.owner));
    c.Add("type", Value::String(std::string(TransTypeName(tc.type))));
    Value& range = c.Add("range", Value::Array());
    for (uint64_t id : tc.range) range.Push(Value::String(std::to_string(id)));
    c.Add("policy", Value::String(std::string(FilterActionName(tc.action))));
  }
  return doc;
}

std::string PolicyToText(const PolicyConfig& p) {
  return json::DumpPretty(PolicyToJson(p));
}

}  // namespace mica
