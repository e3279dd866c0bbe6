#pragma once

#include <map>
#include <string>

#include <json.hpp>

namespace selliptic {

enum class Condition {
  Structural,
  KO,
  Delta2,
  HZero,
  LocalIntegrability,
  SubcriticalIntegral,
  SubcriticalClassifier,
};

enum class Verdict { Holds, Fails, Inconclusive };

inline const char* to_string(Condition c) {
  switch (c) {
    case Condition::Structural: return "structural";
    case Condition::KO: return "keller_osserman";
    case Condition::Delta2: return "delta2";
    case Condition::HZero: return "h_zero";
    case Condition::LocalIntegrability: return "local_integrability";
    case Condition::SubcriticalIntegral: return "subcritical_integral";
    case Condition::SubcriticalClassifier: return "subcritical_classifier";
  }
  return "?";
}

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

/// Verdict plus the numeric evidence that produced it.
struct ConditionReport {
  Condition condition = Condition::Structural;
  Verdict verdict = Verdict::Inconclusive;
  std::map<std::string, double> evidence;
  std::string notes;

  bool holds() const { return verdict == Verdict::Holds; }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["condition"] = to_string(condition);
    j["verdict"] = to_string(verdict);
    j["evidence"] = evidence;
    j["notes"] = notes;
    return j;
  }
};

}  // namespace selliptic
