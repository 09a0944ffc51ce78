#ifndef DIRNET_EXPRESSION_HPP
#define DIRNET_EXPRESSION_HPP

#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dirnet {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Update-rule expression over finite alphabets.
///
/// Leaves are lagged agent values (`y3[-2]`), the owning agent's noise
/// (`e3`), the owning agent's own corrupted stream (`u3[-1]`, only inside
/// corruption rules), the corruption noise (`z`) and integer constants.
/// Operators:
///   OR  -> max of arguments,  AND -> min of arguments,
///   XOR -> parity of the number of nonzero arguments,
///   NOT -> (M-1) - a,  ADD / MUL -> sum / product modulo M,
///   LUT -> table lookup on the base-M index of the arguments
///          (first argument is the most significant digit).
/// M is the alphabet size of the agent that owns the expression.
struct Expr {
  enum class Kind { Var, Own, Noise, Zeta, Const, Or, And, Xor, Not, Add, Mul, Table };

  Kind kind = Kind::Const;
  int agent = -1;  // Var: referenced agent (0-based)
  int lag = 0;     // Var / Own: lag >= 0
  int value = 0;   // Const
  std::vector<Expr> args;
  std::vector<int> table;  // Table

  static Expr var(int agent, int lag);
  static Expr own(int lag);
  static Expr noise();
  static Expr zeta();
  static Expr constant(int value);
  static Expr op(Kind kind, std::vector<Expr> args);
  static Expr lut(std::vector<int> table, std::vector<Expr> args);

  bool is_leaf() const { return args.empty() && kind != Kind::Table; }
};

/// Lagged references an expression makes, collected syntactically.
struct ExprTerms {
  std::set<std::pair<int, int>> vars;  // (agent, lag)
  std::set<int> own_lags;
  bool uses_noise = false;
  bool uses_zeta = false;
};

ExprTerms collect_terms(const Expr& e);

/// Upper bound on the value an expression can produce. `alphabet_of(j)`
/// gives the alphabet size of agent j; `own_alphabet` applies to noise,
/// zeta, own-stream leaves and the modular operators.
int value_bound(const Expr& e, const std::function<int(int)>& alphabet_of, int own_alphabet,
                int zeta_alphabet);

/// Leaf lookup used during evaluation.
struct EvalInputs {
  std::function<int(int agent, int lag)> var;
  std::function<int(int lag)> own;
  int noise = 0;
  int zeta = 0;
  int modulus = 2;
};

int evaluate(const Expr& e, const EvalInputs& in);

/// Parsing context: which leaves are legal and how identifiers resolve.
struct ParseRules {
  int agent_count = 0;
  int owner = 0;            // agent owning the expression (0-based)
  bool corruption = false;  // true for a custom corruption rule
};

/// Parses the function-call expression syntax, e.g.
/// `OR(y1[-1], y3[-1], e2)` or `LUT([0,1,1,0], y1[-1], e2)`.
Expr parse_expression(std::string_view text, const ParseRules& rules);

std::string to_string(const Expr& e);

}  // namespace dirnet

#endif  // DIRNET_EXPRESSION_HPP
