#include "dirnet/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <sstream>

namespace dirnet {

Expr Expr::var(int agent, int lag) {
  Expr e;
  e.kind = Kind::Var;
  e.agent = agent;
  e.lag = lag;
  return e;
}

Expr Expr::own(int lag) {
  Expr e;
  e.kind = Kind::Own;
  e.lag = lag;
  return e;
}

Expr Expr::noise() {
  Expr e;
  e.kind = Kind::Noise;
  return e;
}

Expr Expr::zeta() {
  Expr e;
  e.kind = Kind::Zeta;
  return e;
}

Expr Expr::constant(int value) {
  Expr e;
  e.kind = Kind::Const;
  e.value = value;
  return e;
}

Expr Expr::op(Kind kind, std::vector<Expr> args) {
  if (args.empty()) throw ModelError("operator needs at least one argument");
  if (kind == Kind::Not && args.size() != 1) throw ModelError("NOT takes exactly one argument");
  Expr e;
  e.kind = kind;
  e.args = std::move(args);
  return e;
}

Expr Expr::lut(std::vector<int> table, std::vector<Expr> args) {
  if (args.empty()) throw ModelError("LUT needs at least one argument");
  Expr e;
  e.kind = Kind::Table;
  e.table = std::move(table);
  e.args = std::move(args);
  return e;
}

namespace {

void collect(const Expr& e, ExprTerms& out) {
  switch (e.kind) {
    case Expr::Kind::Var: out.vars.emplace(e.agent, e.lag); break;
    case Expr::Kind::Own: out.own_lags.insert(e.lag); break;
    case Expr::Kind::Noise: out.uses_noise = true; break;
    case Expr::Kind::Zeta: out.uses_zeta = true; break;
    default: break;
  }
  for (const auto& a : e.args) collect(a, out);
}

}  // namespace

ExprTerms collect_terms(const Expr& e) {
  ExprTerms t;
  collect(e, t);
  return t;
}

int value_bound(const Expr& e, const std::function<int(int)>& alphabet_of, int own_alphabet,
                int zeta_alphabet) {
  auto child = [&](const Expr& a) { return value_bound(a, alphabet_of, own_alphabet, zeta_alphabet); };
  switch (e.kind) {
    case Expr::Kind::Var: return alphabet_of(e.agent) - 1;
    case Expr::Kind::Own:
    case Expr::Kind::Noise: return own_alphabet - 1;
    case Expr::Kind::Zeta: return zeta_alphabet - 1;
    case Expr::Kind::Const:
      if (e.value < 0) throw ModelError("negative constant " + std::to_string(e.value));
      return e.value;
    case Expr::Kind::Or:
    case Expr::Kind::And: {
      int b = 0;
      for (const auto& a : e.args) b = std::max(b, child(a));
      return b;
    }
    case Expr::Kind::Xor:
      for (const auto& a : e.args) child(a);
      return 1;
    case Expr::Kind::Not:
      if (child(e.args[0]) > own_alphabet - 1)
        throw ModelError("NOT argument may exceed the alphabet: " + to_string(e));
      return own_alphabet - 1;
    case Expr::Kind::Add:
    case Expr::Kind::Mul:
      for (const auto& a : e.args) child(a);
      return own_alphabet - 1;
    case Expr::Kind::Table: {
      std::size_t expected = 1;
      for (const auto& a : e.args) {
        if (child(a) > own_alphabet - 1)
          throw ModelError("LUT argument may exceed the alphabet: " + to_string(e));
        expected *= static_cast<std::size_t>(own_alphabet);
      }
      if (e.table.size() != expected)
        throw ModelError("LUT table has " + std::to_string(e.table.size()) + " entries, expected " +
                         std::to_string(expected));
      int b = 0;
      for (int v : e.table) {
        if (v < 0) throw ModelError("negative LUT entry");
        b = std::max(b, v);
      }
      return b;
    }
  }
  return 0;
}

int evaluate(const Expr& e, const EvalInputs& in) {
  switch (e.kind) {
    case Expr::Kind::Var: return in.var(e.agent, e.lag);
    case Expr::Kind::Own: return in.own(e.lag);
    case Expr::Kind::Noise: return in.noise;
    case Expr::Kind::Zeta: return in.zeta;
    case Expr::Kind::Const: return e.value;
    case Expr::Kind::Or: {
      int v = 0;
      for (const auto& a : e.args) v = std::max(v, evaluate(a, in));
      return v;
    }
    case Expr::Kind::And: {
      int v = evaluate(e.args[0], in);
      for (std::size_t k = 1; k < e.args.size(); ++k) v = std::min(v, evaluate(e.args[k], in));
      return v;
    }
    case Expr::Kind::Xor: {
      int parity = 0;
      for (const auto& a : e.args) parity ^= evaluate(a, in) != 0 ? 1 : 0;
      return parity;
    }
    case Expr::Kind::Not: return in.modulus - 1 - evaluate(e.args[0], in);
    case Expr::Kind::Add: {
      int v = 0;
      for (const auto& a : e.args) v = (v + evaluate(a, in)) % in.modulus;
      return v;
    }
    case Expr::Kind::Mul: {
      int v = 1 % in.modulus;
      for (const auto& a : e.args) v = (v * evaluate(a, in)) % in.modulus;
      return v;
    }
    case Expr::Kind::Table: {
      std::size_t index = 0;
      for (const auto& a : e.args) index = index * static_cast<std::size_t>(in.modulus) + evaluate(a, in);
      return e.table[index];
    }
  }
  return 0;
}

namespace {

class Parser {
 public:
  Parser(std::string_view text, const ParseRules& rules) : text_(text), rules_(rules) {}

  Expr parse() {
    Expr e = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ModelError(what + " at column " + std::to_string(pos_ + 1) + " in '" + std::string(text_) + "'");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  std::string identifier() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  int integer() {
    skip_space();
    int value = 0;
    const char* begin = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(begin, text_.data() + text_.size(), value);
    if (ec != std::errc()) fail("expected integer");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return value;
  }

  // `[-k]` or `[0]`; returns the lag k >= 0.
  std::optional<int> lag_suffix() {
    if (!accept('[')) return std::nullopt;
    const int offset = integer();
    expect(']');
    if (offset > 0) fail("future reference (positive offset)");
    return -offset;
  }

  std::vector<Expr> arguments() {
    std::vector<Expr> args;
    expect('(');
    if (accept(')')) return args;
    do {
      args.push_back(expression());
    } while (accept(','));
    expect(')');
    return args;
  }

  int stream_index(const std::string& id) {
    int k = 0;
    auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), k);
    if (ec != std::errc() || ptr != id.data() + id.size()) fail("bad stream name '" + id + "'");
    if (k < 1 || k > rules_.agent_count) fail("stream '" + id + "' out of range");
    return k - 1;
  }

  Expr expression() {
    skip_space();
    if (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '-'))
      return Expr::constant(integer());
    const std::string id = identifier();
    if (id.empty()) fail("expected expression");
    std::string upper = id;
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });

    if (upper == "OR") return Expr::op(Expr::Kind::Or, arguments());
    if (upper == "AND") return Expr::op(Expr::Kind::And, arguments());
    if (upper == "XOR") return Expr::op(Expr::Kind::Xor, arguments());
    if (upper == "NOT") return Expr::op(Expr::Kind::Not, arguments());
    if (upper == "ADD") return Expr::op(Expr::Kind::Add, arguments());
    if (upper == "MUL") return Expr::op(Expr::Kind::Mul, arguments());
    if (upper == "LUT") {
      expect('(');
      expect('[');
      std::vector<int> table;
      if (!accept(']')) {
        do {
          table.push_back(integer());
        } while (accept(','));
        expect(']');
      }
      std::vector<Expr> args;
      while (accept(',')) args.push_back(expression());
      expect(')');
      return Expr::lut(std::move(table), std::move(args));
    }
    if (id == "z") {
      if (!rules_.corruption) fail("'z' is only available in corruption rules");
      return Expr::zeta();
    }
    if (id.size() >= 2 && id[0] == 'e') {
      if (rules_.corruption) fail("agent noise is not available in corruption rules");
      if (stream_index(id) != rules_.owner) fail("noise '" + id + "' belongs to another agent");
      return Expr::noise();
    }
    if (id.size() >= 2 && id[0] == 'y') {
      const int agent = stream_index(id);
      const std::optional<int> lag = lag_suffix();
      if (rules_.corruption) {
        if (agent != rules_.owner) fail("corruption of one agent cannot read '" + id + "'");
        return Expr::var(agent, lag.value_or(0));
      }
      if (!lag || *lag < 1) fail("'" + id + "' needs a strictly positive lag, e.g. " + id + "[-1]");
      return Expr::var(agent, *lag);
    }
    if (id.size() >= 2 && id[0] == 'u') {
      if (!rules_.corruption) fail("corrupted streams cannot drive the generative model");
      if (stream_index(id) != rules_.owner) fail("corruption cannot read another agent's stream");
      const std::optional<int> lag = lag_suffix();
      if (!lag || *lag < 1) fail("'" + id + "' needs a strictly positive lag");
      return Expr::own(*lag);
    }
    fail("unknown identifier '" + id + "'");
  }

  std::string_view text_;
  const ParseRules& rules_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(std::string_view text, const ParseRules& rules) { return Parser(text, rules).parse(); }

std::string to_string(const Expr& e) {
  std::ostringstream os;
  auto lag_text = [](int lag) { return lag == 0 ? std::string("[0]") : "[-" + std::to_string(lag) + "]"; };
  switch (e.kind) {
    case Expr::Kind::Var: os << 'y' << e.agent + 1 << lag_text(e.lag); return os.str();
    case Expr::Kind::Own: os << "u" << lag_text(e.lag); return os.str();
    case Expr::Kind::Noise: return "e";
    case Expr::Kind::Zeta: return "z";
    case Expr::Kind::Const: return std::to_string(e.value);
    case Expr::Kind::Or: os << "OR"; break;
    case Expr::Kind::And: os << "AND"; break;
    case Expr::Kind::Xor: os << "XOR"; break;
    case Expr::Kind::Not: os << "NOT"; break;
    case Expr::Kind::Add: os << "ADD"; break;
    case Expr::Kind::Mul: os << "MUL"; break;
    case Expr::Kind::Table: {
      os << "LUT([";
      for (std::size_t k = 0; k < e.table.size(); ++k) os << (k ? "," : "") << e.table[k];
      os << "]";
      for (const auto& a : e.args) os << ", " << to_string(a);
      os << ")";
      return os.str();
    }
  }
  os << '(';
  for (std::size_t k = 0; k < e.args.size(); ++k) os << (k ? ", " : "") << to_string(e.args[k]);
  os << ')';
  return os.str();
}

}  // namespace dirnet
