#include <algorithm>
#include <cctype>
#include <sstream>

#include "qrprox/error.hpp"
#include "qrprox/rules.hpp"

namespace qrprox::rules {

std::string_view to_symbol(CompareOp op) {
  switch (op) {
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
  }
  return "?";
}

Term Term::literal(std::int64_t v) {
  Term t;
  t.kind = Kind::IntLiteral;
  t.value = v;
  return t;
}
Term Term::counter(TimeInterval i) {
  Term t;
  t.kind = Kind::Counter;
  t.interval = i;
  return t;
}
Term Term::rssi(MacAddress mac) {
  Term t;
  t.kind = Kind::Rssi;
  t.mac = mac;
  return t;
}

bool Term::operator==(const Term& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case Kind::IntLiteral: return value == other.value;
    case Kind::Counter: return interval == other.interval;
    case Kind::Rssi: return mac == other.mac;
  }
  return false;
}

Condition Condition::conj(std::vector<Condition> cs) {
  Condition c;
  c.kind = Kind::And;
  c.children = std::move(cs);
  return c;
}
Condition Condition::disj(std::vector<Condition> cs) {
  Condition c;
  c.kind = Kind::Or;
  c.children = std::move(cs);
  return c;
}
Condition Condition::negate(Condition inner) {
  Condition c;
  c.kind = Kind::Not;
  c.children.push_back(std::move(inner));
  return c;
}
Condition Condition::compare(Term lhs, CompareOp op, Term rhs) {
  Condition c;
  c.kind = Kind::Compare;
  c.lhs = std::move(lhs);
  c.op = op;
  c.rhs = std::move(rhs);
  return c;
}
Condition Condition::first(TimeInterval i) {
  Condition c;
  c.kind = Kind::First;
  c.interval = i;
  return c;
}
Condition Condition::visible(MacAddress mac) {
  Condition c;
  c.kind = Kind::Visible;
  c.mac = mac;
  return c;
}
Condition Condition::boolean(bool value) {
  Condition c;
  c.kind = Kind::BoolLiteral;
  c.literal = value;
  return c;
}

bool Condition::operator==(const Condition& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case Kind::And:
    case Kind::Or:
    case Kind::Not:
      return children == other.children;
    case Kind::Compare:
      return op == other.op && lhs == other.lhs && rhs == other.rhs;
    case Kind::First:
      return interval == other.interval;
    case Kind::Visible:
      return mac == other.mac;
    case Kind::BoolLiteral:
      return literal == other.literal;
  }
  return false;
}

bool Rule::operator==(const Rule& other) const {
  return name == other.name && condition == other.condition && action == other.action;
}

namespace {

enum class Tok {
  If, Then, And, Or, Not, Counter, First, Visible, Rssi, True, False,
  LParen, RParen, LBrace, RBrace,
  Int, Minus, Mac, CmpOp, Ident, End,
};

struct Token {
  Tok kind = Tok::End;
  std::int64_t int_value = 0;
  MacAddress mac;
  CompareOp op = CompareOp::Eq;
  std::string text;
  int line = 1;
  int column = 1;
};

const char* token_name(Tok t) {
  switch (t) {
    case Tok::If: return "IF";
    case Tok::Then: return "THEN";
    case Tok::And: return "AND";
    case Tok::Or: return "OR";
    case Tok::Not: return "NOT";
    case Tok::Counter: return "COUNTER";
    case Tok::First: return "FIRST";
    case Tok::Visible: return "VISIBLE";
    case Tok::Rssi: return "RSSI";
    case Tok::True: return "TRUE";
    case Tok::False: return "FALSE";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Int: return "integer";
    case Tok::Minus: return "'-'";
    case Tok::Mac: return "MAC address";
    case Tok::CmpOp: return "comparison operator";
    case Tok::Ident: return "identifier";
    case Tok::End: return "end of input";
  }
  return "?";
}

bool is_hex(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

class Lexer {
public:
  explicit Lexer(std::string_view source) : src_(source) {}

  int line() const { return line_; }
  int column() const { return column_; }

  Token next() {
    skip_blank();
    Token tok;
    tok.line = line_;
    tok.column = column_;
    if (eof()) {
      tok.kind = Tok::End;
      return tok;
    }
    char c = peek();
    if (try_mac(tok)) return tok;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::int64_t value = 0;
      std::string text;
      while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
        text += peek();
        value = value * 10 + (peek() - '0');
        advance();
      }
      tok.kind = Tok::Int;
      tok.int_value = value;
      tok.text = text;
      return tok;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string word;
      while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
        word += peek();
        advance();
      }
      std::string upper = word;
      std::transform(upper.begin(), upper.end(), upper.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
      tok.text = word;
      if (upper == "IF") tok.kind = Tok::If;
      else if (upper == "THEN") tok.kind = Tok::Then;
      else if (upper == "AND") tok.kind = Tok::And;
      else if (upper == "OR") tok.kind = Tok::Or;
      else if (upper == "NOT") tok.kind = Tok::Not;
      else if (upper == "COUNTER") tok.kind = Tok::Counter;
      else if (upper == "FIRST") tok.kind = Tok::First;
      else if (upper == "VISIBLE") tok.kind = Tok::Visible;
      else if (upper == "RSSI") tok.kind = Tok::Rssi;
      else if (upper == "TRUE") tok.kind = Tok::True;
      else if (upper == "FALSE") tok.kind = Tok::False;
      else tok.kind = Tok::Ident;
      return tok;
    }
    switch (c) {
      case '(': advance(); tok.kind = Tok::LParen; return tok;
      case ')': advance(); tok.kind = Tok::RParen; return tok;
      case '{': advance(); tok.kind = Tok::LBrace; return tok;
      case '}': advance(); tok.kind = Tok::RBrace; return tok;
      case '-': advance(); tok.kind = Tok::Minus; return tok;
      case '>':
        advance();
        tok.kind = Tok::CmpOp;
        tok.op = consume_if('=') ? CompareOp::Ge : CompareOp::Gt;
        return tok;
      case '<':
        advance();
        tok.kind = Tok::CmpOp;
        tok.op = consume_if('=') ? CompareOp::Le : CompareOp::Lt;
        return tok;
      case '=':
        advance();
        tok.kind = Tok::CmpOp;
        tok.op = CompareOp::Eq;
        return tok;
      case '!':
        advance();
        if (consume_if('=')) {
          tok.kind = Tok::CmpOp;
          tok.op = CompareOp::Ne;
          return tok;
        }
        throw RuleParseError(ErrorCode::ParseError, tok.line, tok.column,
                             "stray '!', did you mean '!='");
      default:
        throw RuleParseError(ErrorCode::ParseError, tok.line, tok.column,
                             std::string("unexpected character '") + c + "'");
    }
  }

  /// Raw action text: everything up to the first '}', verbatim. The
  /// cursor is assumed to be just past the opening '{'.
  std::string action_text() {
    std::string text;
    int open_line = line_, open_column = column_;
    while (!eof() && peek() != '}') {
      text += peek();
      advance();
    }
    if (eof()) {
      throw RuleParseError(ErrorCode::ParseError, open_line, open_column,
                           "unterminated action, expected '}'");
    }
    advance();  // consume '}'
    auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, end - begin + 1);
  }

private:
  bool eof() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  bool consume_if(char c) {
    if (!eof() && peek() == c) {
      advance();
      return true;
    }
    return false;
  }

  void skip_blank() {
    while (!eof()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  bool try_mac(Token& tok) {
    // XX?XX?XX?XX?XX?XX with a consistent '-' or ':' separator, not
    // followed by more word characters.
    if (pos_ + 17 > src_.size()) return false;
    std::string_view window = src_.substr(pos_, 17);
    char sep = window[2];
    if (sep != '-' && sep != ':') return false;
    for (std::size_t i = 0; i < 17; ++i) {
      if (i % 3 == 2) {
        if (window[i] != sep) return false;
      } else if (!is_hex(window[i])) {
        return false;
      }
    }
    if (pos_ + 17 < src_.size()) {
      char after = src_[pos_ + 17];
      if (std::isalnum(static_cast<unsigned char>(after)) || after == '_' || after == sep) {
        return false;
      }
    }
    tok.kind = Tok::Mac;
    tok.mac = *MacAddress::parse(window);
    tok.text = std::string(window);
    for (int i = 0; i < 17; ++i) advance();
    return true;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

class Parser {
public:
  explicit Parser(std::string_view source) : lexer_(source) { shift(); }

  std::vector<Rule> rules() {
    std::vector<Rule> out;
    while (current_.kind != Tok::End) {
      expect(Tok::If, {"IF"});
      Rule rule;
      rule.condition = or_expr();
      expect(Tok::Then, {"THEN", "AND", "OR"});
      if (current_.kind != Tok::LBrace) fail({"'{'"});
      rule.action = lexer_.action_text();
      shift();
      out.push_back(std::move(rule));
    }
    return out;
  }

private:
  Condition or_expr() {
    std::vector<Condition> children;
    children.push_back(and_expr());
    while (current_.kind == Tok::Or) {
      shift();
      children.push_back(and_expr());
    }
    if (children.size() == 1) return std::move(children.front());
    return Condition::disj(std::move(children));
  }

  Condition and_expr() {
    std::vector<Condition> children;
    children.push_back(unary());
    while (current_.kind == Tok::And) {
      shift();
      children.push_back(unary());
    }
    if (children.size() == 1) return std::move(children.front());
    return Condition::conj(std::move(children));
  }

  Condition unary() {
    if (current_.kind == Tok::Not) {
      shift();
      return Condition::negate(unary());
    }
    return atom();
  }

  Condition atom() {
    switch (current_.kind) {
      case Tok::First: {
        shift();
        expect(Tok::LParen, {"'('"});
        TimeInterval interval = interval_literal();
        expect(Tok::RParen, {"')'"});
        return Condition::first(interval);
      }
      case Tok::Visible: {
        shift();
        expect(Tok::LParen, {"'('"});
        MacAddress mac = mac_literal();
        expect(Tok::RParen, {"')'"});
        return Condition::visible(mac);
      }
      case Tok::True:
        shift();
        return Condition::boolean(true);
      case Tok::False:
        shift();
        return Condition::boolean(false);
      case Tok::LParen: {
        shift();
        Condition inner = or_expr();
        expect(Tok::RParen, {"')'", "AND", "OR"});
        return inner;
      }
      case Tok::Counter:
      case Tok::Rssi:
      case Tok::Int:
      case Tok::Minus: {
        Term lhs = term();
        if (current_.kind != Tok::CmpOp) fail({"comparison operator"});
        CompareOp op = current_.op;
        shift();
        Term rhs = term();
        return Condition::compare(std::move(lhs), op, std::move(rhs));
      }
      default:
        fail({"FIRST", "VISIBLE", "TRUE", "FALSE", "'('", "COUNTER", "RSSI", "NOT", "integer"});
    }
  }

  Term term() {
    switch (current_.kind) {
      case Tok::Counter: {
        shift();
        expect(Tok::LParen, {"'('"});
        TimeInterval interval = interval_literal();
        expect(Tok::RParen, {"')'"});
        return Term::counter(interval);
      }
      case Tok::Rssi: {
        shift();
        expect(Tok::LParen, {"'('"});
        MacAddress mac = mac_literal();
        expect(Tok::RParen, {"')'"});
        return Term::rssi(mac);
      }
      case Tok::Minus: {
        shift();
        if (current_.kind != Tok::Int) fail({"integer"});
        std::int64_t v = -current_.int_value;
        shift();
        return Term::literal(v);
      }
      case Tok::Int: {
        std::int64_t v = current_.int_value;
        shift();
        return Term::literal(v);
      }
      default:
        fail({"COUNTER", "RSSI", "integer"});
    }
  }

  TimeInterval interval_literal() {
    int line = current_.line, column = current_.column;
    std::int64_t v;
    if (current_.kind == Tok::Minus) {
      shift();
      if (current_.kind != Tok::Int) fail({"integer"});
      v = -current_.int_value;
      shift();
    } else if (current_.kind == Tok::Int) {
      v = current_.int_value;
      shift();
    } else {
      fail({"interval code 0..3"});
    }
    if (v < 0 || v > 3) {
      throw RuleParseError(ErrorCode::InvalidInterval, line, column,
                           "interval code must be 0..3, got " + std::to_string(v));
    }
    return static_cast<TimeInterval>(v);
  }

  MacAddress mac_literal() {
    if (current_.kind != Tok::Mac) fail({"MAC address"});
    MacAddress mac = current_.mac;
    shift();
    return mac;
  }

  void shift() { current_ = lexer_.next(); }

  void expect(Tok kind, std::vector<std::string> expected) {
    if (current_.kind != kind) fail(std::move(expected));
    shift();
  }

  [[noreturn]] void fail(std::vector<std::string> expected) {
    std::ostringstream msg;
    msg << "expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i > 0) msg << (i + 1 == expected.size() ? " or " : ", ");
      msg << expected[i];
    }
    msg << ", got " << token_name(current_.kind);
    if (!current_.text.empty()) msg << " '" << current_.text << "'";
    throw RuleParseError(ErrorCode::ParseError, current_.line, current_.column, msg.str(),
                         std::move(expected));
  }

  Lexer lexer_;
  Token current_;
};

std::string print_term(const Term& t) {
  switch (t.kind) {
    case Term::Kind::IntLiteral: return std::to_string(t.value);
    case Term::Kind::Counter:
      return "COUNTER(" + std::to_string(static_cast<int>(t.interval)) + ")";
    case Term::Kind::Rssi: return "RSSI(" + t.mac.to_string() + ")";
  }
  return "?";
}

std::string print_condition(const Condition& c);

std::string print_child(const Condition& child, Condition::Kind parent) {
  bool parens = false;
  if (parent == Condition::Kind::Or) {
    parens = child.kind == Condition::Kind::Or;
  } else {  // And, Not
    parens = child.kind == Condition::Kind::Or || child.kind == Condition::Kind::And;
  }
  std::string text = print_condition(child);
  return parens ? "(" + text + ")" : text;
}

std::string print_condition(const Condition& c) {
  switch (c.kind) {
    case Condition::Kind::Or: {
      std::string out;
      for (std::size_t i = 0; i < c.children.size(); ++i) {
        if (i > 0) out += " OR ";
        out += print_child(c.children[i], Condition::Kind::Or);
      }
      return out;
    }
    case Condition::Kind::And: {
      std::string out;
      for (std::size_t i = 0; i < c.children.size(); ++i) {
        if (i > 0) out += " AND ";
        out += print_child(c.children[i], Condition::Kind::And);
      }
      return out;
    }
    case Condition::Kind::Not:
      return "NOT " + print_child(c.children.front(), Condition::Kind::Not);
    case Condition::Kind::Compare:
      return print_term(c.lhs) + " " + std::string(to_symbol(c.op)) + " " + print_term(c.rhs);
    case Condition::Kind::First:
      return "FIRST(" + std::to_string(static_cast<int>(c.interval)) + ")";
    case Condition::Kind::Visible:
      return "VISIBLE(" + c.mac.to_string() + ")";
    case Condition::Kind::BoolLiteral:
      return c.literal ? "TRUE" : "FALSE";
  }
  return "?";
}

}  // namespace

std::vector<Rule> parse_rules(std::string_view source) { return Parser(source).rules(); }

std::string to_text(const Condition& condition) { return print_condition(condition); }

std::string to_text(const Rule& rule) {
  return "IF " + print_condition(rule.condition) + " THEN { " + rule.action + " }";
}

std::string to_text(const std::vector<Rule>& rules) {
  std::string out;
  for (const Rule& rule : rules) {
    out += to_text(rule);
    out += '\n';
  }
  return out;
}

}  // namespace qrprox::rules
