#include "qfb/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "qfb/error.hpp"

namespace qfb {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Shortest representation that parses back to the same double.
std::string fmt_double(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
  throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + what);
}

double to_double(std::string_view v, int line, const std::string& key) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end) parse_fail(line, key + ": expected a number, got '" + std::string(v) + "'");
  return out;
}

long long to_int(std::string_view v, int line, const std::string& key) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end) parse_fail(line, key + ": expected an integer, got '" + std::string(v) + "'");
  return out;
}

std::uint64_t to_u64(std::string_view v, int line, const std::string& key) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end) parse_fail(line, key + ": expected an unsigned integer, got '" + std::string(v) + "'");
  return out;
}

bool to_bool(std::string_view v, int line, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  parse_fail(line, key + ": expected true or false");
}

template <typename F>
auto wrap_validation(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ParseError) throw;
    throw Error(ErrorKind::ValidationError, key + ": " + e.detail());
  }
}

InitialState parse_rho0(std::string_view v, int line) {
  if (v.substr(0, 7) != "entries")
    return wrap_validation("campaign.rho0", [&] { return InitialState::named(std::string(v)); });
  std::istringstream in{std::string(v.substr(7))};
  std::vector<std::string> tokens;
  for (std::string tok; in >> tok;) tokens.push_back(tok);
  if (tokens.size() != 32) parse_fail(line, "campaign.rho0: entries needs 32 numbers (16 re/im pairs)");
  Mat4 m;
  for (int k = 0; k < 16; ++k)
    m.a[k] = Cplx(to_double(tokens[2 * k], line, "campaign.rho0"),
                  to_double(tokens[2 * k + 1], line, "campaign.rho0"));
  return wrap_validation("campaign.rho0", [&] { return InitialState::explicit_matrix(m); });
}

struct ParseState {
  CampaignConfig cfg;
  bool controller_target_set = false;
  bool gamma2_set = false;
};

using Setter = std::function<void(ParseState&, std::string_view, int)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["model.n_channels"] = [](ParseState& s, std::string_view v, int l) {
      s.cfg.model.n_channels = static_cast<int>(to_int(v, l, "model.n_channels"));
    };
    t["model.eta1"] = [](ParseState& s, std::string_view v, int l) { s.cfg.model.eta1 = to_double(v, l, "model.eta1"); };
    t["model.M1"] = [](ParseState& s, std::string_view v, int l) { s.cfg.model.M1 = to_double(v, l, "model.M1"); };
    t["model.eta2"] = [](ParseState& s, std::string_view v, int l) { s.cfg.model.eta2 = to_double(v, l, "model.eta2"); };
    t["model.M2"] = [](ParseState& s, std::string_view v, int l) { s.cfg.model.M2 = to_double(v, l, "model.M2"); };
    t["model.omega"] = [](ParseState& s, std::string_view v, int l) { s.cfg.model.omega = to_double(v, l, "model.omega"); };
    t["model.target"] = [](ParseState& s, std::string_view v, int) {
      s.cfg.model.target = wrap_validation("model.target", [&] { return parse_bell(v); });
    };
    t["controller.kind"] = [](ParseState& s, std::string_view v, int) {
      s.cfg.controller.kind = wrap_validation("controller.kind", [&] { return parse_controller_kind(v); });
    };
    t["controller.target"] = [](ParseState& s, std::string_view v, int) {
      s.cfg.controller.target = wrap_validation("controller.target", [&] { return parse_bell(v); });
      s.controller_target_set = true;
    };
    t["controller.alpha"] = [](ParseState& s, std::string_view v, int l) { s.cfg.controller.alpha = to_double(v, l, "controller.alpha"); };
    t["controller.beta"] = [](ParseState& s, std::string_view v, int l) { s.cfg.controller.beta = to_double(v, l, "controller.beta"); };
    t["controller.gamma"] = [](ParseState& s, std::string_view v, int l) { s.cfg.controller.gamma = to_double(v, l, "controller.gamma"); };
    t["controller.gamma1"] = [](ParseState& s, std::string_view v, int l) { s.cfg.controller.gamma1 = to_double(v, l, "controller.gamma1"); };
    t["controller.gamma2"] = [](ParseState& s, std::string_view v, int l) {
      s.cfg.controller.gamma2 = to_double(v, l, "controller.gamma2");
      s.gamma2_set = true;
    };
    t["controller.epsilon"] = [](ParseState& s, std::string_view v, int l) { s.cfg.controller.epsilon = to_double(v, l, "controller.epsilon"); };
    t["sde.dt"] = [](ParseState& s, std::string_view v, int l) { s.cfg.sde.dt = to_double(v, l, "sde.dt"); };
    t["sde.t_final"] = [](ParseState& s, std::string_view v, int l) { s.cfg.sde.t_final = to_double(v, l, "sde.t_final"); };
    t["sde.projection_tol"] = [](ParseState& s, std::string_view v, int l) { s.cfg.sde.projection_tol = to_double(v, l, "sde.projection_tol"); };
    t["sde.seed"] = [](ParseState& s, std::string_view v, int l) { s.cfg.sde.seed = to_u64(v, l, "sde.seed"); };
    t["sde.log_stride"] = [](ParseState& s, std::string_view v, int l) { s.cfg.sde.log_stride = static_cast<int>(to_int(v, l, "sde.log_stride")); };
    t["sde.noise_refinement"] = [](ParseState& s, std::string_view v, int l) {
      s.cfg.sde.noise_refinement = static_cast<int>(to_int(v, l, "sde.noise_refinement"));
    };
    t["campaign.n_traj"] = [](ParseState& s, std::string_view v, int l) { s.cfg.n_traj = static_cast<int>(to_int(v, l, "campaign.n_traj")); };
    t["campaign.rho0"] = [](ParseState& s, std::string_view v, int l) { s.cfg.rho0 = parse_rho0(v, l); };
    t["campaign.out_dir"] = [](ParseState& s, std::string_view v, int) { s.cfg.out_dir = std::string(v); };
    t["campaign.workers"] = [](ParseState& s, std::string_view v, int l) { s.cfg.workers = static_cast<int>(to_int(v, l, "campaign.workers")); };
    t["campaign.classify_tol"] = [](ParseState& s, std::string_view v, int l) { s.cfg.classify_tol = to_double(v, l, "campaign.classify_tol"); };
    t["campaign.fit_t_lo"] = [](ParseState& s, std::string_view v, int l) { s.cfg.fit_t_lo = to_double(v, l, "campaign.fit_t_lo"); };
    t["campaign.fit_t_hi"] = [](ParseState& s, std::string_view v, int l) { s.cfg.fit_t_hi = to_double(v, l, "campaign.fit_t_hi"); };
    t["campaign.write_trajectories"] = [](ParseState& s, std::string_view v, int l) {
      s.cfg.write_trajectories = to_bool(v, l, "campaign.write_trajectories");
    };
    return t;
  }();
  return table;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"fig1_qsr", "fig2_stab2_psi+", "fig3_stab2_phi-",
                                                 "fig4_stab1_psi+", "fig5_stab1_phi-"};
  return names;
}

// Controlled runs start at a pure state with |u| near its maximum; the
// explicit step then leaves negative eigenvalues of order (|u| dt)^2 Var(H),
// which at dt = 1e-3 reaches the per-step projection limit.
constexpr double kTwoChannelDt = 2.5e-4;
constexpr double kOneChannelDt = 5e-4;

CampaignConfig expand_preset(std::string_view name) {
  CampaignConfig c;
  c.preset = std::string(name);
  // Common to every figure.
  c.model.omega = 0.3;
  c.model.eta1 = 0.3;
  c.model.M1 = 1.0;
  c.model.eta2 = 0.4;
  c.model.M2 = 0.9;
  c.sde = SdeConfig{};
  c.n_traj = 1000;

  if (name == "fig1_qsr") {
    c.model.n_channels = 2;
    c.model.target = BellLabel::PsiPlus;
    c.controller = Controller::zero(BellLabel::PsiPlus);
    c.rho0 = InitialState::named("fig1_diag");
    c.sde.t_final = 10.0;
  } else if (name == "fig2_stab2_psi+" || name == "fig3_stab2_phi-") {
    const bool psi = name == "fig2_stab2_psi+";
    c.model.n_channels = 2;
    c.model.target = psi ? BellLabel::PsiPlus : BellLabel::PhiMinus;
    c.controller = Controller::two_channel(c.model.target, 10.0, 12.0, 1.0);
    c.rho0 = InitialState::named(psi ? "phi-" : "psi+");
    c.sde.t_final = 10.0;
    c.sde.dt = kTwoChannelDt;
  } else if (name == "fig4_stab1_psi+" || name == "fig5_stab1_phi-") {
    const bool psi = name == "fig4_stab1_psi+";
    c.model.n_channels = 1;
    c.model.target = psi ? BellLabel::PsiPlus : BellLabel::PhiMinus;
    c.controller = Controller::one_channel(c.model.target, 4.0, 0.15);
    c.rho0 = InitialState::named(psi ? "phi-" : "psi+");
    c.sde.t_final = 30.0;
    c.sde.dt = kOneChannelDt;
  } else {
    throw Error(ErrorKind::ValidationError, "preset: unknown preset '" + std::string(name) + "'");
  }
  return c;
}

CampaignConfig parse_config_text(std::string_view text) {
  struct Entry {
    std::string key;
    std::string value;
    int line;
  };
  std::vector<Entry> entries;
  std::string preset;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') parse_fail(line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "model" && section != "controller" && section != "sde" && section != "campaign")
        parse_fail(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) parse_fail(line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) parse_fail(line_no, "empty key");
    if (value.empty()) parse_fail(line_no, "empty value for " + key);
    if (section.empty()) {
      if (key != "preset") parse_fail(line_no, "key '" + key + "' outside a section");
      if (!preset.empty()) parse_fail(line_no, "preset given twice");
      preset = value;
      continue;
    }
    const std::string full = section + "." + key;
    if (!setters().count(full)) parse_fail(line_no, "unknown key '" + full + "'");
    entries.push_back({full, value, line_no});
  }

  ParseState state;
  if (!preset.empty()) state.cfg = expand_preset(preset);
  for (const auto& e : entries) setters().at(e.key)(state, e.value, e.line);

  CampaignConfig& c = state.cfg;
  if (!state.controller_target_set) c.controller.target = c.model.target;
  if (c.controller.kind == ControllerKind::OneChannel && !state.gamma2_set)
    c.controller.gamma2 = one_channel_sign(c.controller.target) * c.controller.gamma1;
  c.validate();
  return c;
}

CampaignConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const CampaignConfig& c) {
  std::ostringstream o;
  if (!c.preset.empty()) o << "preset = " << c.preset << "\n\n";
  o << "[model]\n"
    << "n_channels = " << c.model.n_channels << '\n'
    << "eta1 = " << fmt_double(c.model.eta1) << '\n'
    << "M1 = " << fmt_double(c.model.M1) << '\n'
    << "eta2 = " << fmt_double(c.model.eta2) << '\n'
    << "M2 = " << fmt_double(c.model.M2) << '\n'
    << "omega = " << fmt_double(c.model.omega) << '\n'
    << "target = " << to_string(c.model.target) << "\n\n";
  o << "[controller]\n"
    << "kind = " << to_string(c.controller.kind) << '\n'
    << "target = " << to_string(c.controller.target) << '\n'
    << "alpha = " << fmt_double(c.controller.alpha) << '\n'
    << "beta = " << fmt_double(c.controller.beta) << '\n'
    << "gamma = " << fmt_double(c.controller.gamma) << '\n'
    << "gamma1 = " << fmt_double(c.controller.gamma1) << '\n'
    << "gamma2 = " << fmt_double(c.controller.gamma2) << '\n'
    << "epsilon = " << fmt_double(c.controller.epsilon) << "\n\n";
  o << "[sde]\n"
    << "dt = " << fmt_double(c.sde.dt) << '\n'
    << "t_final = " << fmt_double(c.sde.t_final) << '\n'
    << "projection_tol = " << fmt_double(c.sde.projection_tol) << '\n'
    << "seed = " << c.sde.seed << '\n'
    << "log_stride = " << c.sde.log_stride << '\n'
    << "noise_refinement = " << c.sde.noise_refinement << "\n\n";
  o << "[campaign]\n"
    << "n_traj = " << c.n_traj << '\n';
  if (!c.rho0.name.empty()) {
    o << "rho0 = " << c.rho0.name << '\n';
  } else {
    o << "rho0 = entries";
    for (const auto& z : c.rho0.rho.matrix().a) o << ' ' << fmt_double(z.real()) << ' ' << fmt_double(z.imag());
    o << '\n';
  }
  o << "out_dir = " << c.out_dir << '\n'
    << "workers = " << c.workers << '\n'
    << "classify_tol = " << fmt_double(c.classify_tol) << '\n';
  if (c.fit_t_lo) o << "fit_t_lo = " << fmt_double(*c.fit_t_lo) << '\n';
  if (c.fit_t_hi) o << "fit_t_hi = " << fmt_double(*c.fit_t_hi) << '\n';
  o << "write_trajectories = " << (c.write_trajectories ? "true" : "false") << '\n';
  return o.str();
}

nlohmann::json config_to_json(const CampaignConfig& c) {
  nlohmann::json j;
  j["preset"] = c.preset;
  j["model"] = {{"n_channels", c.model.n_channels}, {"eta1", c.model.eta1}, {"M1", c.model.M1},
                {"eta2", c.model.eta2},             {"M2", c.model.M2},     {"omega", c.model.omega},
                {"target", std::string(to_string(c.model.target))}};
  j["controller"] = {{"kind", std::string(to_string(c.controller.kind))},
                     {"target", std::string(to_string(c.controller.target))},
                     {"alpha", c.controller.alpha},
                     {"beta", c.controller.beta},
                     {"gamma", c.controller.gamma},
                     {"gamma1", c.controller.gamma1},
                     {"gamma2", c.controller.gamma2},
                     {"epsilon", c.controller.epsilon}};
  j["sde"] = {{"dt", c.sde.dt},
              {"t_final", c.sde.t_final},
              {"projection_tol", c.sde.projection_tol},
              {"seed", c.sde.seed},
              {"log_stride", c.sde.log_stride},
              {"noise_refinement", c.sde.noise_refinement}};
  nlohmann::json campaign = {{"n_traj", c.n_traj},
                             {"out_dir", c.out_dir},
                             {"workers", c.workers},
                             {"classify_tol", c.classify_tol},
                             {"fit_t_lo", c.window_lo()},
                             {"fit_t_hi", c.window_hi()},
                             {"write_trajectories", c.write_trajectories}};
  if (!c.rho0.name.empty()) {
    campaign["rho0"] = c.rho0.name;
  } else {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& z : c.rho0.rho.matrix().a) entries.push_back({z.real(), z.imag()});
    campaign["rho0"] = entries;
  }
  j["campaign"] = campaign;
  return j;
}

}  // namespace qfb
