#include "qrprox/error.hpp"
#include "qrprox/rules.hpp"

namespace qrprox::rules {

namespace {

std::int64_t evaluate_term(const Term& term, const EvalContext& ctx) {
  switch (term.kind) {
    case Term::Kind::IntLiteral:
      return term.value;
    case Term::Kind::Counter:
      if (!ctx.store) throw Error(ErrorCode::InvalidArgument, "COUNTER needs a scan store");
      return ctx.store->count_scans(ctx.user_token, term.interval, ctx.now);
    case Term::Kind::Rssi: {
      if (!ctx.fingerprint) return ctx.rssi_floor;
      return ctx.fingerprint->rssi_of(term.mac).value_or(ctx.rssi_floor);
    }
  }
  return 0;
}

bool compare(std::int64_t lhs, CompareOp op, std::int64_t rhs) {
  switch (op) {
    case CompareOp::Lt: return lhs < rhs;
    case CompareOp::Le: return lhs <= rhs;
    case CompareOp::Gt: return lhs > rhs;
    case CompareOp::Ge: return lhs >= rhs;
    case CompareOp::Eq: return lhs == rhs;
    case CompareOp::Ne: return lhs != rhs;
  }
  return false;
}

}  // namespace

bool evaluate_condition(const Condition& condition, const EvalContext& ctx) {
  switch (condition.kind) {
    case Condition::Kind::And:
      for (const Condition& child : condition.children) {
        if (!evaluate_condition(child, ctx)) return false;
      }
      return true;
    case Condition::Kind::Or:
      for (const Condition& child : condition.children) {
        if (evaluate_condition(child, ctx)) return true;
      }
      return false;
    case Condition::Kind::Not:
      return !evaluate_condition(condition.children.front(), ctx);
    case Condition::Kind::Compare:
      return compare(evaluate_term(condition.lhs, ctx), condition.op,
                     evaluate_term(condition.rhs, ctx));
    case Condition::Kind::First:
      if (!ctx.store) throw Error(ErrorCode::InvalidArgument, "FIRST needs a scan store");
      return ctx.store->is_first_scan(ctx.user_token, condition.interval, ctx.now);
    case Condition::Kind::Visible:
      return ctx.fingerprint && ctx.fingerprint->contains(condition.mac);
    case Condition::Kind::BoolLiteral:
      return condition.literal;
  }
  return false;
}

std::vector<std::string> evaluate_all(const std::vector<Rule>& rules, const EvalContext& ctx) {
  std::vector<std::string> actions;
  for (const Rule& rule : rules) {
    if (evaluate_condition(rule.condition, ctx)) actions.push_back(rule.action);
  }
  return actions;
}

}  // namespace qrprox::rules
