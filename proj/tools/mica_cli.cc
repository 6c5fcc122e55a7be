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

// mica: command-line front end for the simulator.
//
//   mica run <scenario.json> [--json] [--log events.jsonl]
//   mica validate <policy.json>
//   mica attest <scenario.json> --from <realm> -o token.bin [--nonce text]
//   mica verify <token.bin> --anchor <hex> --nonce <hex|text>
//   mica sizes --realms N
//
// Exit status: 0 success, 1 failed expectation or verification, 2 usage or
// parse error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "mica/attestation.h"
#include "mica/digest.h"
#include "mica/policy.h"
#include "mica/scenario.h"
#include "mica/topology.h"

namespace {

using mica::Bytes;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

bool ReadFile(const std::string& path, std::string* out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::stringstream ss;
  ss << in.rdbuf();
  *out = ss.str();
  return true;
}

bool WriteFile(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  return static_cast<bool>(out);
}

int Fail(int code, const std::string& msg) {
  std::cerr << "mica: " << msg << "\n";
  return code;
}

// Loads a scenario; parse problems are usage errors.
int Load(const std::string& path, mica::Scenario* out) {
  auto s = mica::LoadScenario(path);
  if (!s.ok()) return Fail(kUsage, path + ": " + s.status().ToString());
  *out = std::move(s).value();
  return kOk;
}

int WriteLog(const std::string& path, const std::string& log) {
  if (path.empty()) return kOk;
  if (!WriteFile(path, log)) return Fail(kUsage, "cannot write " + path);
  return kOk;
}

int CmdRun(const std::string& path, bool as_json, const std::string& log) {
  mica::Scenario s;
  if (int rc = Load(path, &s); rc != kOk) return rc;
  mica::ScenarioRunner runner(std::move(s));
  mica::ScenarioReport report = runner.Run();
  if (int rc = WriteLog(log, report.event_log); rc != kOk) return rc;
  if (as_json) {
    std::cout << mica::json::DumpPretty(report.ToJson()) << "\n";
  } else {
    std::cout << "scenario " << report.name << " (seed " << report.seed << ")\n";
    if (!report.setup_error.empty()) {
      std::cout << "  setup failed: " << report.setup_error << "\n";
    }
    for (const auto& st : report.steps) {
      std::cout << "  [" << st.index << "] " << st.op << " -> " << st.outcome;
      if (st.expected) {
        std::cout << (st.passed ? "  ok" : "  EXPECTED " + *st.expected);
      }
      if (!st.detail.empty()) std::cout << "  (" << st.detail << ")";
      std::cout << "\n";
    }
    for (const auto& [src, sinks] : report.oracle.edges) {
      for (mica::RealmId dst : sinks) {
        std::cout << "  flow " << runner.RealmName(src) << " -> "
                  << runner.RealmName(dst) << "\n";
      }
    }
    for (const auto& d : report.oracle_disagreements) {
      std::cout << "  oracle disagreement: " << d << "\n";
    }
    for (const auto& v : report.confinement_violations) {
      std::cout << "  confinement violation: " << v << "\n";
    }
    std::cout << (report.passed() ? "PASS" : "FAIL") << "\n";
  }
  return report.passed() ? kOk : kFailed;
}

int CmdValidate(const std::string& path) {
  std::string text;
  if (!ReadFile(path, &text)) return Fail(kUsage, "cannot read " + path);
  auto policy = mica::ParsePolicy(text);
  if (!policy.ok()) return Fail(kFailed, path + ": " + policy.status().ToString());
  auto blob = mica::EncodePolicy(*policy);
  if (!blob.ok()) return Fail(kFailed, path + ": " + blob.status().ToString());
  std::cout << "self: " << policy->self_id << "\n"
            << "peers: " << policy->peers.size() << "\n"
            << "mem_channels: " << policy->mem_channels.size() << "\n"
            << "trans_channels: " << policy->trans_channels.size() << "\n"
            << "blob_bytes: " << blob->size() << "\n"
            << "digest: " << mica::HexEncode(mica::PolicyDigest(*blob)) << "\n";
  return kOk;
}

int CmdAttest(const std::string& path, const std::string& from,
              const std::string& output, const std::string& nonce_text,
              const std::string& log) {
  mica::Scenario s;
  if (int rc = Load(path, &s); rc != kOk) return rc;
  mica::ScenarioRunner runner(std::move(s));
  mica::ScenarioReport report = runner.Run();
  if (int rc = WriteLog(log, report.event_log); rc != kOk) return rc;
  if (!report.setup_error.empty()) return Fail(kFailed, report.setup_error);
  auto r = runner.RealmByName(from);
  if (!r) return Fail(kUsage, "no realm named " + from);
  const mica::Realm* realm = runner.platform().realm(*r);
  if (!realm->committed() || !realm->policy->self()->is_gateway) {
    return Fail(kFailed, from + " is not a gateway and may not export tokens");
  }
  mica::Digest nonce = mica::NonceFromText(nonce_text);
  auto token = runner.RetrieveToken(*r, nonce);
  if (!token.ok()) return Fail(kFailed, token.status().ToString());
  std::string_view bytes(reinterpret_cast<const char*>(token->data()), token->size());
  if (!WriteFile(output, bytes)) return Fail(kUsage, "cannot write " + output);
  std::cout << "token_bytes: " << token->size() << "\n"
            << "nonce: " << mica::HexEncode(nonce) << "\n"
            << "anchor: " << runner.signer().anchor() << "\n";
  return kOk;
}

int CmdVerify(const std::string& path, const std::string& anchor_hex,
              const std::string& nonce_text) {
  std::string raw;
  if (!ReadFile(path, &raw)) return Fail(kUsage, "cannot read " + path);
  auto anchor = mica::KeyedDigestSigner::FromAnchor(anchor_hex);
  if (anchor == nullptr) return Fail(kUsage, "--anchor must be a hex key");
  Bytes token(raw.begin(), raw.end());
  auto verified =
      mica::VerifyGroupToken(token, *anchor, mica::NonceFromText(nonce_text));
  if (!verified.ok()) return Fail(kFailed, verified.status().ToString());

  using mica::json::Value;
  Value out = Value::Object();
  out.Add("nonce", Value::String(mica::HexEncode(verified->nonce)));
  Value& realms = out.Add("realms", Value::Array());
  for (const auto& vr : verified->realms) {
    Value v = Value::Object();
    v.Add("gid", Value::Int(static_cast<int64_t>(vr.gid)));
    v.Add("rim", Value::String(mica::HexEncode(vr.rim)));
    v.Add("rem", Value::String(mica::HexEncode(vr.rem)));
    v.Add("committed", Value::Bool(vr.committed));
    if (vr.policy) v.Add("self", Value::String(vr.policy->self_id));
    realms.Push(std::move(v));
  }
  Value& channels = out.Add("channels", Value::Array());
  for (const auto& ch : verified->channels) {
    Value v = Value::Object();
    Value& names = v.Add("names", Value::Array());
    for (const auto& n : ch.names) names.Push(Value::String(n));
    Value& members = v.Add("members", Value::Array());
    for (uint64_t m : ch.members) members.Push(Value::Int(static_cast<int64_t>(m)));
    v.Add("active", Value::Bool(ch.active));
    channels.Push(std::move(v));
  }
  std::cout << mica::json::DumpPretty(out) << "\n";
  return kOk;
}

int CmdSizes(size_t realms) {
  auto rows = mica::ChainTokenSizes(realms);
  if (!rows.ok()) return Fail(kFailed, rows.status().ToString());
  std::printf("%-7s %-12s %-10s %-15s %s\n", "realms", "token_bytes", "delta",
              "platform_token", "policy_bytes");
  size_t prev = 0;
  for (const auto& row : *rows) {
    std::string delta = prev == 0 ? "-" : std::to_string(row.token_bytes - prev);
    std::printf("%-7zu %-12zu %-10s %-15zu %zu\n", row.realms, row.token_bytes,
                delta.c_str(), row.platform_token_bytes, row.policy_bytes);
    prev = row.token_bytes;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MICA confidential-computing simulator"};
  app.require_subcommand(1);
  std::string log_path;
  app.add_option("--log", log_path, "write the monitor event log (JSON lines)");

  std::string scenario_path, policy_path, token_path, from, output, anchor;
  std::string nonce = "nonce";
  bool as_json = false;
  size_t realms = 6;

  auto* run = app.add_subcommand("run", "run a scenario file");
  run->add_option("scenario", scenario_path)->required();
  run->add_flag("--json", as_json, "print the full report as JSON");

  auto* validate = app.add_subcommand("validate", "parse and encode a policy");
  validate->add_option("policy", policy_path)->required();

  auto* attest = app.add_subcommand("attest", "run a scenario and export a group token");
  attest->add_option("scenario", scenario_path)->required();
  attest->add_option("--from", from, "gateway realm that requests the token")->required();
  attest->add_option("-o,--output", output, "token file")->required();
  attest->add_option("--nonce", nonce, "64 hex digits or any text");

  auto* verify = app.add_subcommand("verify", "verify a group token");
  verify->add_option("token", token_path)->required();
  verify->add_option("--anchor", anchor, "hex trust anchor")->required();
  verify->add_option("--nonce", nonce, "expected nonce")->required();

  auto* sizes = app.add_subcommand("sizes", "group-token sizes for chains");
  sizes->add_option("--realms", realms, "largest chain")
      ->check(CLI::Range(1, 64));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (*run) return CmdRun(scenario_path, as_json, log_path);
  if (*validate) return CmdValidate(policy_path);
  if (*attest) return CmdAttest(scenario_path, from, output, nonce, log_path);
  if (*verify) return CmdVerify(token_path, anchor, nonce);
  if (*sizes) return CmdSizes(realms);
  return kUsage;
}
