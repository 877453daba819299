// Tri-state verdicts and the structured report object shared by all audits.

#ifndef DRILL_REPORT_HPP_
#define DRILL_REPORT_HPP_

#include <string>
#include <utility>

#include <json.hpp>

namespace drill {

using json = nlohmann::ordered_json;

enum class Verdict { Pass, Fail, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    default: return "inconclusive";
  }
}

inline int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Pass: return 0;
    case Verdict::Fail: return 1;
    default: return 2;
  }
}

struct Report {
  std::string kind;
  Verdict verdict = Verdict::Inconclusive;
  json details = json::object();

  Report() = default;
  Report(std::string k, Verdict v) : kind(std::move(k)), verdict(v) {}

  bool passed() const { return verdict == Verdict::Pass; }
  bool failed() const { return verdict == Verdict::Fail; }

  json to_json() const {
    json j;
    j["kind"] = kind;
    j["verdict"] = to_string(verdict);
    j["details"] = details;
    return j;
  }
};

}  // namespace drill

#endif  // DRILL_REPORT_HPP_
