#include "dirnet/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dirnet/expression.hpp"

namespace dirnet {

namespace fs = std::filesystem;

ConfigError::ConfigError(std::string file, int line, std::string field, const std::string& message)
    : std::runtime_error(file + ":" + std::to_string(line) + ": " + (field.empty() ? "" : "'" + field + "': ") +
                         message),
      file_(std::move(file)),
      line_(line),
      field_(std::move(field)) {}

namespace {

struct Statement {
  std::string file;
  int line = 0;
  std::vector<std::string> words;  // tokens before ':='
  std::optional<std::string> expression;

  [[noreturn]] void fail(const std::string& field, const std::string& message) const {
    throw ConfigError(file, line, field, message);
  }
  const std::string& keyword() const { return words.front(); }
};

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

void read_statements(std::istream& in, const std::string& source, const fs::path& base,
                     std::vector<Statement>& out, std::vector<std::string>& includes, int nesting) {
  if (nesting > 8) throw ConfigError(source, 0, "network", "network files nest too deeply");
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    raw = trim(raw);
    if (raw.empty()) continue;
    Statement st;
    st.file = source;
    st.line = line_no;
    std::string head = raw;
    if (auto def = raw.find(":="); def != std::string::npos) {
      head = raw.substr(0, def);
      st.expression = trim(raw.substr(def + 2));
      if (st.expression->empty()) st.fail(trim(head), "empty expression after ':='");
    }
    std::istringstream words(head);
    for (std::string w; words >> w;) st.words.push_back(w);
    if (st.words.empty()) st.fail("", "statement without a keyword");

    if (st.keyword() == "network") {
      if (st.words.size() != 2) st.fail("network", "expected one path");
      const fs::path path = base / st.words[1];
      std::ifstream nested(path);
      if (!nested) st.fail("network", "cannot open " + path.string());
      includes.push_back(path.string());
      read_statements(nested, path.string(), path.parent_path(), out, includes, nesting + 1);
      continue;
    }
    out.push_back(std::move(st));
  }
}

double parse_real(const Statement& st, const std::string& field, const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      st.fail(field, "expected a number, got '" + text + "'");
    }
    if (used != s.size() || !std::isfinite(v)) st.fail(field, "expected a number, got '" + text + "'");
    return v;
  };
  if (auto slash = text.find('/'); slash != std::string::npos) {
    const double den = number(text.substr(slash + 1));
    if (den == 0.0) st.fail(field, "zero denominator in '" + text + "'");
    return number(text.substr(0, slash)) / den;
  }
  return number(text);
}

long long parse_integer(const Statement& st, const std::string& field, const std::string& text) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    st.fail(field, "expected an integer, got '" + text + "'");
  }
  if (used != text.size()) st.fail(field, "expected an integer, got '" + text + "'");
  return v;
}

// "y3" -> 2 for prefix 'y'.
int parse_agent(const Statement& st, const std::string& text, char prefix, int agent_count) {
  if (text.size() < 2 || text[0] != prefix) st.fail(text, std::string("expected ") + prefix + "<agent>");
  const long long k = parse_integer(st, text, text.substr(1));
  if (k < 1 || k > agent_count) st.fail(text, "agent index outside 1.." + std::to_string(agent_count));
  return static_cast<int>(k - 1);
}

void expect_words(const Statement& st, std::size_t count) {
  if (st.words.size() != count)
    st.fail(st.keyword(), "expected " + std::to_string(count - 1) + " value(s), got " + std::to_string(st.words.size() - 1));
}

// Law tokens start at words[from]; returns the law and the index after it.
std::pair<NoiseLaw, std::size_t> parse_law(const Statement& st, const std::string& field, std::size_t from,
                                           int alphabet) {
  if (from >= st.words.size()) st.fail(field, "missing law (bernoulli, categorical or point)");
  const std::string& kind = st.words[from];
  try {
    if (kind == "bernoulli") {
      if (from + 1 >= st.words.size()) st.fail(field, "bernoulli needs a probability");
      const double p = parse_real(st, field, st.words[from + 1]);
      if (!(p >= 0.0 && p <= 1.0)) st.fail(field, "probability outside [0, 1]");
      return {NoiseLaw::bernoulli(p), from + 2};
    }
    if (kind == "categorical") {
      std::vector<double> probs;
      std::size_t k = from + 1;
      for (; k < st.words.size(); ++k) {
        const std::string& w = st.words[k];
        if (!(std::isdigit(static_cast<unsigned char>(w[0])) || w[0] == '.')) break;
        probs.push_back(parse_real(st, field, w));
      }
      if (probs.empty()) st.fail(field, "categorical needs probabilities");
      return {NoiseLaw(probs), k};
    }
    if (kind == "point") {
      if (from + 1 >= st.words.size()) st.fail(field, "point needs a symbol");
      const long long s = parse_integer(st, field, st.words[from + 1]);
      if (s < 0) st.fail(field, "negative symbol");
      const int m = alphabet > 0 ? alphabet : static_cast<int>(s) + 1;
      if (s >= m) st.fail(field, "symbol outside the alphabet");
      return {NoiseLaw::point_mass(static_cast<int>(s), m), from + 2};
    }
  } catch (const ModelError& e) {
    st.fail(field, e.what());
  }
  st.fail(field, "unknown law '" + kind + "'");
}

Corruption parse_corruption(const Statement& st, int agent, int agent_count) {
  const std::string field = st.words[1];
  if (st.words.size() < 3) st.fail(field, "missing corruption kind");
  const std::string& kind = st.words[2];
  auto no_expression = [&] {
    if (st.expression) st.fail(field, "unexpected ':=' for " + kind + " corruption");
  };
  if (kind == "delay") {
    no_expression();
    if (st.words.size() != 6) st.fail(field, "delay expects d1 d2 p");
    RandomDelay d;
    d.d1 = static_cast<int>(parse_integer(st, field, st.words[3]));
    d.d2 = static_cast<int>(parse_integer(st, field, st.words[4]));
    d.p = parse_real(st, field, st.words[5]);
    return d;
  }
  if (kind == "drop") {
    no_expression();
    if (st.words.size() != 4) st.fail(field, "drop expects a delivery probability");
    return PacketDrop{parse_real(st, field, st.words[3])};
  }
  if (kind == "filter") {
    no_expression();
    NoisyFilter f;
    f.taps.clear();
    std::size_t k = 3;
    if (k >= st.words.size() || st.words[k] != "taps") st.fail(field, "filter expects 'taps w0 w1 ...'");
    const std::set<std::string> keywords{"flip", "additive", "quantize"};
    for (++k; k < st.words.size() && !keywords.contains(st.words[k]); ++k)
      f.taps.push_back(parse_real(st, field, st.words[k]));
    if (f.taps.empty()) st.fail(field, "filter needs at least one tap");
    while (k < st.words.size()) {
      const std::string& w = st.words[k++];
      if (w == "flip") {
        if (k >= st.words.size()) st.fail(field, "flip needs a probability");
        f.noise_kind = NoisyFilter::NoiseKind::Flip;
        f.flip_probability = parse_real(st, field, st.words[k++]);
      } else if (w == "additive") {
        std::vector<double> probs;
        for (; k < st.words.size() && !keywords.contains(st.words[k]); ++k)
          probs.push_back(parse_real(st, field, st.words[k]));
        try {
          f.additive = NoiseLaw(probs);
        } catch (const ModelError& e) {
          st.fail(field, e.what());
        }
        f.noise_kind = NoisyFilter::NoiseKind::Additive;
      } else if (w == "quantize") {
        if (k >= st.words.size()) st.fail(field, "quantize expects 'round' or 'threshold t...'");
        const std::string& q = st.words[k++];
        if (q == "round") {
          f.quantizer.kind = Quantizer::Kind::Round;
        } else if (q == "threshold") {
          f.quantizer.kind = Quantizer::Kind::Threshold;
          for (; k < st.words.size() && !keywords.contains(st.words[k]); ++k)
            f.quantizer.thresholds.push_back(parse_real(st, field, st.words[k]));
          if (f.quantizer.thresholds.empty()) st.fail(field, "threshold quantizer needs levels");
          if (!std::is_sorted(f.quantizer.thresholds.begin(), f.quantizer.thresholds.end()))
            st.fail(field, "thresholds must be ascending");
        } else {
          st.fail(field, "unknown quantizer '" + q + "'");
        }
      } else {
        st.fail(field, "unexpected '" + w + "' in filter");
      }
    }
    return f;
  }
  if (kind == "custom") {
    if (!st.expression) st.fail(field, "custom corruption needs ':= expression'");
    if (st.words.size() < 4 || st.words[3] != "zeta") st.fail(field, "custom expects 'zeta <law> := expression'");
    CustomTable c;
    auto [law, next] = parse_law(st, field, 4, 0);
    if (next != st.words.size()) st.fail(field, "trailing tokens after the zeta law");
    c.zeta = law;
    try {
      c.expression = parse_expression(*st.expression, ParseRules{agent_count, agent, true});
    } catch (const ModelError& e) {
      st.fail(field, e.what());
    }
    return c;
  }
  st.fail(field, "unknown corruption kind '" + kind + "'");
}

}  // namespace

std::vector<std::size_t> ExperimentConfig::checkpoint_schedule() const {
  std::vector<std::size_t> out;
  const auto n = static_cast<std::size_t>(horizon);
  if (checkpoints.empty()) {
    for (std::size_t c = 100; c < n; c *= 10) out.push_back(c);
  } else {
    for (auto c : checkpoints)
      if (c >= 1 && c < n) out.push_back(c);
  }
  out.push_back(n);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::string> ExperimentConfig::warnings() const {
  std::vector<std::string> w;
  if (!network) return w;
  double joint = 1.0;
  for (int a : net().alphabets()) joint *= a;
  const double needed = 10.0 * std::pow(joint, depth);
  if (static_cast<double>(horizon) < needed) {
    std::ostringstream os;
    os << "horizon " << horizon << " is below 10*A^D = " << needed << " for the joint context alphabet A = " << joint
       << " at depth " << depth << "; estimates may be unreliable";
    w.push_back(os.str());
  }
  return w;
}

void ExperimentConfig::validate() const {
  auto bad = [&](const std::string& field, const std::string& msg) { throw ConfigError(source, 0, field, msg); };
  if (!network) bad("agents", "no network defined");
  if (horizon < 1) bad("horizon", "must be at least 1");
  if (trials < 1) bad("trials", "must be at least 1");
  if (depth < 0) bad("depth", "must be non-negative");
  if (!(threshold > 0.0)) bad("threshold", "must be positive");
  if (horizon_struct && *horizon_struct < 1) bad("horizon_struct", "must be at least 1");
  if (surrogates < 1) bad("surrogates", "must be at least 1");
}

ExperimentConfig parse_config(std::istream& in, const std::string& source, const std::string& base_dir) {
  ExperimentConfig cfg;
  cfg.source = source;
  std::vector<Statement> statements;
  std::vector<std::string> includes;
  read_statements(in, source, fs::path(base_dir), statements, includes, 0);
  if (!includes.empty()) cfg.network_path = includes.front();

  const Statement* agents_stmt = nullptr;
  for (const auto& st : statements)
    if (st.keyword() == "agents") {
      if (agents_stmt) st.fail("agents", "declared twice");
      agents_stmt = &st;
    }
  if (!agents_stmt) throw ConfigError(source, 0, "agents", "missing 'agents N'");
  expect_words(*agents_stmt, 2);
  const long long n_ll = parse_integer(*agents_stmt, "agents", agents_stmt->words[1]);
  if (n_ll < 1 || n_ll > 64) agents_stmt->fail("agents", "agent count must lie in 1..64");
  const int n = static_cast<int>(n_ll);

  std::vector<int> alphabets(static_cast<std::size_t>(n), 2);
  for (const auto& st : statements) {
    if (st.keyword() != "alphabet") continue;
    if (st.words.size() == 2) {
      const long long m = parse_integer(st, "alphabet", st.words[1]);
      if (m < 2) st.fail("alphabet", "alphabet size must be at least 2");
      std::fill(alphabets.begin(), alphabets.end(), static_cast<int>(m));
    } else if (st.words.size() == 3) {
      const int k = parse_agent(st, st.words[1], 'y', n);
      const long long m = parse_integer(st, "alphabet", st.words[2]);
      if (m < 2) st.fail("alphabet", "alphabet size must be at least 2");
      alphabets[static_cast<std::size_t>(k)] = static_cast<int>(m);
    } else {
      st.fail("alphabet", "expected 'alphabet M' or 'alphabet yK M'");
    }
  }

  std::vector<std::optional<Expr>> exprs(static_cast<std::size_t>(n));
  std::vector<std::optional<NoiseLaw>> laws(static_cast<std::size_t>(n));
  std::vector<const Statement*> rule_stmt(static_cast<std::size_t>(n), nullptr);
  std::vector<std::pair<const Statement*, Corruption>> corruptions;

  for (const auto& st : statements) {
    const std::string& kw = st.keyword();
    if (st.expression && kw != "corrupt") {
      if (st.words.size() != 1) st.fail(kw, "expected 'yK := expression'");
      const int k = parse_agent(st, kw, 'y', n);
      if (exprs[static_cast<std::size_t>(k)]) st.fail(kw, "rule defined twice");
      try {
        exprs[static_cast<std::size_t>(k)] = parse_expression(*st.expression, ParseRules{n, k, false});
      } catch (const ModelError& e) {
        st.fail(kw, e.what());
      }
      rule_stmt[static_cast<std::size_t>(k)] = &st;
      continue;
    }
    if (kw == "agents" || kw == "alphabet") continue;
    if (kw == "noise") {
      if (st.words.size() < 3) st.fail("noise", "expected 'noise eK <law>'");
      const int k = parse_agent(st, st.words[1], 'e', n);
      auto [law, next] = parse_law(st, st.words[1], 2, alphabets[static_cast<std::size_t>(k)]);
      if (next != st.words.size()) st.fail(st.words[1], "trailing tokens after the law");
      laws[static_cast<std::size_t>(k)] = law;
    } else if (kw == "corrupt") {
      if (st.words.size() < 2) st.fail("corrupt", "expected 'corrupt uK <kind> ...'");
      const int k = parse_agent(st, st.words[1], 'u', n);
      for (const auto& [other, c] : corruptions)
        if (other->words[1] == st.words[1]) st.fail(st.words[1], "corruption defined twice");
      corruptions.emplace_back(&st, parse_corruption(st, k, n));
    } else if (kw == "horizon") {
      expect_words(st, 2);
      cfg.horizon = static_cast<int>(parse_integer(st, kw, st.words[1]));
      if (cfg.horizon < 1) st.fail(kw, "must be at least 1");
    } else if (kw == "trials") {
      expect_words(st, 2);
      cfg.trials = static_cast<int>(parse_integer(st, kw, st.words[1]));
      if (cfg.trials < 1) st.fail(kw, "must be at least 1");
    } else if (kw == "seed") {
      expect_words(st, 2);
      const long long s = parse_integer(st, kw, st.words[1]);
      if (s < 0) st.fail(kw, "must be non-negative");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (kw == "depth") {
      expect_words(st, 2);
      cfg.depth = static_cast<int>(parse_integer(st, kw, st.words[1]));
      if (cfg.depth < 0) st.fail(kw, "must be non-negative");
    } else if (kw == "threshold") {
      expect_words(st, 2);
      cfg.threshold = parse_real(st, kw, st.words[1]);
      if (!(cfg.threshold > 0.0)) st.fail(kw, "must be positive");
    } else if (kw == "checkpoints") {
      cfg.checkpoints.clear();
      for (std::size_t k = 1; k < st.words.size(); ++k) {
        const long long c = parse_integer(st, kw, st.words[k]);
        if (c < 1) st.fail(kw, "checkpoints must be positive");
        cfg.checkpoints.push_back(static_cast<std::size_t>(c));
      }
    } else if (kw == "output") {
      expect_words(st, 2);
      cfg.output_dir = st.words[1];
    } else if (kw == "aggregate") {
      expect_words(st, 2);
      if (st.words[1] == "mean") cfg.aggregation = Aggregation::Mean;
      else if (st.words[1] == "vote") cfg.aggregation = Aggregation::Vote;
      else st.fail(kw, "expected 'mean' or 'vote'");
    } else if (kw == "horizon_struct") {
      expect_words(st, 2);
      cfg.horizon_struct = static_cast<int>(parse_integer(st, kw, st.words[1]));
      if (*cfg.horizon_struct < 1) st.fail(kw, "must be at least 1");
    } else if (kw == "calibrate") {
      expect_words(st, 2);
      if (st.words[1] == "on") cfg.calibrate = true;
      else if (st.words[1] == "off") cfg.calibrate = false;
      else st.fail(kw, "expected 'on' or 'off'");
    } else if (kw == "surrogates") {
      expect_words(st, 2);
      cfg.surrogates = static_cast<int>(parse_integer(st, kw, st.words[1]));
      if (cfg.surrogates < 1) st.fail(kw, "must be at least 1");
    } else if (kw == "assume") {
      std::string text;
      for (std::size_t k = 1; k < st.words.size(); ++k) text += (k > 1 ? " " : "") + st.words[k];
      cfg.assumptions.push_back(text);
    } else {
      st.fail(kw, "unknown keyword");
    }
  }

  std::vector<AgentRule> rules;
  for (int k = 0; k < n; ++k) {
    const std::string name = "y" + std::to_string(k + 1);
    if (!exprs[static_cast<std::size_t>(k)]) agents_stmt->fail(name, "no update rule");
    const Statement& st = *rule_stmt[static_cast<std::size_t>(k)];
    AgentRule rule{*exprs[static_cast<std::size_t>(k)], NoiseLaw::point_mass(0, alphabets[static_cast<std::size_t>(k)])};
    if (laws[static_cast<std::size_t>(k)]) {
      rule.noise = *laws[static_cast<std::size_t>(k)];
    } else if (collect_terms(rule.expression).uses_noise) {
      st.fail(name, "uses e" + std::to_string(k + 1) + " but no noise law is declared");
    }
    rules.push_back(std::move(rule));
  }
  try {
    cfg.network = std::make_shared<const GenerativeNetwork>(alphabets, std::move(rules));
  } catch (const ModelError& e) {
    // Network errors are prefixed "agent yK:"; report them at that rule.
    const std::string msg = e.what();
    if (msg.rfind("agent y", 0) == 0) {
      const int k = std::atoi(msg.c_str() + 7) - 1;
      if (k >= 0 && k < n && rule_stmt[static_cast<std::size_t>(k)])
        rule_stmt[static_cast<std::size_t>(k)]->fail("y" + std::to_string(k + 1), msg);
    }
    throw ConfigError(source, agents_stmt->line, "network", msg);
  }

  cfg.corruption = CorruptionSpec(n);
  for (const auto& [st, c] : corruptions) {
    const int k = parse_agent(*st, st->words[1], 'u', n);
    CorruptionSpec single(n);
    single.set(k, c);
    try {
      single.validate(*cfg.network);
    } catch (const ModelError& e) {
      st->fail(st->words[1], e.what());
    }
    cfg.corruption.set(k, c);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "", "cannot open config file");
  return parse_config(in, path, fs::path(path).parent_path().string());
}

}  // namespace dirnet
