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

// Runs CompatChecker over a finished scenario and lists where the monitor
// disagrees with it.

#ifndef MICA_TESTS_ORACLE_CHECKER_DIFF_H_
#define MICA_TESTS_ORACLE_CHECKER_DIFF_H_

#include <string>
#include <vector>

#include "mica/scenario.h"
#include "oracle/compat_checker.h"

namespace mica::oracle {

// Disagreements between the monitor and the compatibility checker for one
// finished run.
inline std::vector<std::string> CheckerDisagreements(const ScenarioRunner& runner) {
  const Scenario& sc = runner.scenario();
  const Platform& pf = runner.const_platform();
  std::map<std::string, CompatRealm> realms;
  for (const auto& r : sc.realms) {
    CompatRealm cr;
    RealmId id = *runner.RealmByName(r.name);
    cr.rim = pf.realm(id)->rim;
    auto blob = runner.PolicyBlobFor(r.name);
    if (blob.ok()) {
      auto p = DecodePolicy(*blob);
      if (p.ok()) cr.policy = *p;
    }
    realms[r.name] = cr;
  }
  for (const auto& s : sc.slots) realms[s.realm].slots[s.object] = s.ipa;
  std::map<std::string, CompatObject> objects;
  for (const auto& o : sc.objects) {
    objects[o.name] = CompatObject{
        o.size / kGranuleSize, o.attribute == SlotAttribute::kPrivateShared};
  }
  std::vector<std::string> order;
  for (const auto& a : sc.actions) {
    if (a.op == "upload_policy") order.push_back(a.args.Find("realm")->str);
  }
  CompatVerdict want = CompatChecker(realms, objects).Run(order);

  std::vector<std::string> out;
  for (const auto& r : sc.realms) {
    RealmId id = *runner.RealmByName(r.name);
    const Realm* realm = pf.realm(id);
    bool term = realm->state == RealmState::kTerminated;
    auto it = want.terminated.find(r.name);
    bool want_term = it != want.terminated.end();
    if (term != want_term) {
      out.push_back(r.name + (term ? " terminated" : " survived") +
                    ", checker disagrees");
      continue;
    }
    if (term) {
      std::string got(ValidationFailureName(pf.last_report(id)->failure));
      if (it->second.count(got) == 0) {
        std::string rules;
        for (const auto& rule : it->second) rules += rule + " ";
        out.push_back(r.name + " failed " + got + ", checker expects one of " +
                      rules);
      }
    }
    if (realm->committed() != (want.committed.count(r.name) != 0)) {
      out.push_back(r.name + " commit state differs");
    }
  }
  for (const auto& o : sc.objects) {
    if (o.attribute != SlotAttribute::kPrivateShared) continue;
    bool active = pf.RowActive(runner.objects().at(o.name).front());
    if (active != (want.active_objects.count(o.name) != 0)) {
      out.push_back(o.name + (active ? " active" : " inactive") +
                    ", checker disagrees");
    }
  }
  return out;
}

}  // namespace mica::oracle

#endif  // MICA_TESTS_ORACLE_CHECKER_DIFF_H_
