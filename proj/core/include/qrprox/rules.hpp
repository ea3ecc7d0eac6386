#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qrprox/fingerprint.hpp"
#include "qrprox/metrics.hpp"
#include "qrprox/scan_store.hpp"
#include "qrprox/time_window.hpp"

namespace qrprox::rules {

enum class CompareOp { Lt, Le, Gt, Ge, Eq, Ne };

std::string_view to_symbol(CompareOp op);

/// Integer-valued expression inside a comparison.
struct Term {
  enum class Kind { IntLiteral, Counter, Rssi };

  Kind kind = Kind::IntLiteral;
  std::int64_t value = 0;                        // IntLiteral
  TimeInterval interval = TimeInterval::AllTime;  // Counter
  MacAddress mac;                                // Rssi

  static Term literal(std::int64_t v);
  static Term counter(TimeInterval i);
  static Term rssi(MacAddress mac);

  bool operator==(const Term& other) const;
};

/// Boolean condition tree. And/Or are n-ary in source order; Not has a
/// single child.
struct Condition {
  enum class Kind { And, Or, Not, Compare, First, Visible, BoolLiteral };

  Kind kind = Kind::BoolLiteral;
  std::vector<Condition> children;               // And, Or, Not
  CompareOp op = CompareOp::Eq;                  // Compare
  Term lhs, rhs;                                 // Compare
  TimeInterval interval = TimeInterval::AllTime;  // First
  MacAddress mac;                                // Visible
  bool literal = false;                          // BoolLiteral

  static Condition conj(std::vector<Condition> cs);
  static Condition disj(std::vector<Condition> cs);
  static Condition negate(Condition c);
  static Condition compare(Term lhs, CompareOp op, Term rhs);
  static Condition first(TimeInterval i);
  static Condition visible(MacAddress mac);
  static Condition boolean(bool value);

  bool operator==(const Condition& other) const;
};

/// IF condition THEN { action }. The action is the brace content,
/// verbatim and trimmed; delivery is the caller's business.
struct Rule {
  std::optional<std::string> name;  // not part of the file grammar
  Condition condition;
  std::string action;

  bool operator==(const Rule& other) const;
};

/// Parses rule text. Grammar: rule+ where
///   rule    := IF or_expr THEN { action-text }
///   or_expr := and_expr (OR and_expr)*
///   and_expr:= unary (AND unary)*
///   unary   := NOT unary | atom
///   atom    := ( or_expr ) | FIRST(int) | VISIBLE(mac) | TRUE | FALSE | cmp
///   cmp     := term (< <= > >= = !=) term
///   term    := COUNTER(int) | RSSI(mac) | [-]int
/// Keywords are case-insensitive; '#' comments to end of line; interval
/// literals outside 0..3 fail at parse time. Empty or comment-only
/// source yields an empty rule list.
/// Throws RuleParseError (code ParseError or InvalidInterval).
std::vector<Rule> parse_rules(std::string_view source);

/// Canonical text form; parse_rules(to_text(r)) is structurally identical
/// to r.
std::string to_text(const Condition& condition);
std::string to_text(const Rule& rule);
std::string to_text(const std::vector<Rule>& rules);

/// Everything a condition may consult. The store backs COUNTER/FIRST,
/// the fingerprint backs VISIBLE/RSSI with rssi_floor substituted for
/// invisible APs.
struct EvalContext {
  std::string user_token;
  std::chrono::sys_seconds now;
  const ScanStore* store = nullptr;
  const Fingerprint* fingerprint = nullptr;
  int rssi_floor = kDefaultRssiFloorDbm;
};

bool evaluate_condition(const Condition& condition, const EvalContext& ctx);

/// Evaluates every rule independently; returns the actions of rules
/// whose condition holds, in declaration order. No chaining.
std::vector<std::string> evaluate_all(const std::vector<Rule>& rules, const EvalContext& ctx);

}  // namespace qrprox::rules
