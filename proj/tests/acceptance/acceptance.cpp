// One line per acceptance criterion: PASS/FAIL, name, measured values, time.
// Optional arguments select criteria by name substring.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <list>
#include <map>
#include <string>
#include <vector>

#include "iil/buffers.hpp"
#include "iil/session.hpp"
#include "iil/tips.hpp"

using namespace iil;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_var(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return v.size() < 2 ? 0.0 : s / static_cast<double>(v.size() - 1);
}

template <class T>
T median(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Matrix m(r, c);
  for (auto& v : m.data) v = u(rng);
  return m;
}

// ---- gradients -------------------------------------------------------------

double max_grad_error(Mlp net, const Matrix& x, const Matrix& t) {
  Gradients g = Gradients::zeros_like(net);
  compute_gradients(net, x, t, g);
  const double h = 1e-5;
  double worst = 0;
  auto check = [&](double& p, double analytic) {
    const double keep = p;
    p = keep + h;
    const double up = batch_loss(net, x, t);
    p = keep - h;
    const double down = batch_loss(net, x, t);
    p = keep;
    const double numeric = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-6}));
  };
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    auto& L = net.layers()[l];
    for (std::size_t k = 0; k < L.weights.size(); ++k) check(L.weights[k], g.weights[l][k]);
    for (std::size_t k = 0; k < L.biases.size(); ++k) check(L.biases[k], g.biases[l][k]);
  }
  return worst;
}

Outcome gradient_check() {
  Rng rng(2024);
  const std::vector<std::vector<std::size_t>> archs{{4, 16, 16, 2}, {8, 64, 64, 2}, {3, 7, 5}, {6, 10, 10, 10, 4}};
  double worst = 0;
  int nets = 0;
  for (auto head : {OutputHead::linear, OutputHead::softmax})
    for (std::size_t a = 0; a < archs.size(); ++a) {
      Mlp net(archs[a], head, 500 + a);
      for (auto& L : net.layers())
        for (auto& b : L.biases) b = std::uniform_real_distribution<double>(-0.2, 0.2)(rng);
      Matrix x = random_matrix(8, net.input_dim(), rng);
      Matrix t(8, net.output_dim());
      if (head == OutputHead::linear) {
        t = random_matrix(8, net.output_dim(), rng);
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, net.output_dim() - 1);
        for (std::size_t r = 0; r < 8; ++r) t(r, pick(rng)) = 1.0;
      }
      worst = std::max(worst, max_grad_error(net, x, t));
      ++nets;
    }
  return {worst <= 1e-4, std::to_string(nets) + " networks, max relative error " + fmt("%.2e", worst)};
}

// ---- dynamics model --------------------------------------------------------

Outcome fdm_fidelity() {
  const auto cfg = RunConfig::defaults(EnvKind::cartpole, AgentKind::tips);
  Rng rng(7);
  auto pre = pretrain_fdm(EnvKind::cartpole, 10000, 20, cfg.fdm_pretrain, rng);

  CartPole env;
  Rng held(8);
  std::vector<StateVec> states, truth, pred;
  StateVec s = env.reset(env.default_init(), held);
  while (states.size() < 2000) {
    const ActionVec a = random_action(EnvKind::cartpole, held);
    states.push_back(s);
    truth.push_back(env.true_transition(s, a));
    pred.push_back(pre.fdm.predict(s, a));
    const auto r = env.step(a);
    s = r.done ? env.reset(env.default_init(), held) : r.next_state;
  }
  double worst = 0;
  std::string per_dim;
  for (std::size_t d = 0; d < 4; ++d) {
    std::vector<double> col;
    double mae = 0;
    for (std::size_t k = 0; k < states.size(); ++k) {
      col.push_back(truth[k][d]);
      mae += std::abs(pred[k][d] - truth[k][d]);
    }
    mae /= static_cast<double>(states.size());
    const double ratio = mae / std::sqrt(sample_var(col));
    worst = std::max(worst, ratio);
    per_dim += (d ? " " : "") + fmt("%.3f", ratio);
  }
  return {worst < 0.10, "MAE/std per dimension [" + per_dim + "] (limit 0.10)"};
}

// ---- action encoding -------------------------------------------------------

StateVec rollout_state(Environment& env, EnvKind kind, Rng& rng) {
  StateVec s = env.reset(env.default_init(), rng);
  std::uniform_int_distribution<int> steps(0, 30);
  for (int k = steps(rng); k > 0; --k) {
    const auto r = env.step(random_action(kind, rng));
    if (r.done) break;
    s = r.next_state;
  }
  return s;
}

Outcome encoding_exactness() {
  const EnvKind envs[] = {EnvKind::cartpole, EnvKind::reacher, EnvKind::lander_discrete, EnvKind::lander_continuous};
  int mismatches = 0, global_mismatches = 0, pairs = 0;
  for (EnvKind kind : envs) {
    Rng rng(31 + static_cast<int>(kind));
    auto pre = pretrain_fdm(kind, 2000, 2, TrainConfig{1e-3, 32}, rng, 2000);
    auto env = make_env(kind);
    const auto tc = TipsConfig::defaults(kind);
    std::vector<FeedbackSignal> pool;
    for (int k = 1; k < kSignalCount; ++k) {
      auto sig = static_cast<FeedbackSignal>(k);
      if (sig != FeedbackSignal::hold && sig != FeedbackSignal::do_nothing && !applicable_feedback(kind, sig).empty())
        pool.push_back(sig);
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (int k = 0; k < 1000; ++k, ++pairs) {
      const StateVec s = rollout_state(*env, kind, rng);
      const auto desired = state_correction(kind, s, pool[pick(rng)], tc.e_coarse, tc.e_fine);
      const auto res = encode_action(pre.fdm, s, desired, tc.ifdm_queries, false, rng);
      std::size_t best = 0;
      double best_cost = 0;
      for (std::size_t i = 0; i < res.candidates.size(); ++i) {
        const double c = internal_cost(kind, pre.fdm.predict(s, res.candidates[i]), desired);
        if (i == 0 || c < best_cost) best = i, best_cost = c;
      }
      mismatches += best != res.index;
      if (action_kind_of(kind) == ActionKind::discrete) {
        const auto ex = encode_action(pre.fdm, s, desired, 1, true, rng);
        const std::size_t n = action_dim_of(kind);
        std::size_t g = 0;
        double gc = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const double c = internal_cost(kind, pre.fdm.predict(s, ActionVec::one_hot(n, i)), desired);
          if (i == 0 || c < gc) g = i, gc = c;
        }
        global_mismatches += ex.action.argmax() != g;
      }
    }
  }
  return {mismatches == 0 && global_mismatches == 0,
          std::to_string(pairs) + " pairs, " + std::to_string(mismatches) + " sampled-set mismatches, " +
              std::to_string(global_mismatches) + " exhaustive mismatches"};
}

// ---- Cart-Pole teaching ----------------------------------------------------

constexpr std::uint64_t kCartPoleSeed = 0;

struct Taught {
  std::unique_ptr<Session> session;
  int first = -1;  // first teaching episode with eval mean >= 195
  double untrained = 0.0;
};

// Shared between the Cart-Pole criteria; trained once on first use.
std::map<AgentKind, Taught>& taught_cache() {
  static std::map<AgentKind, Taught> cache;
  return cache;
}

Taught& teach_cartpole(AgentKind agent) {
  auto& cache = taught_cache();
  auto it = cache.find(agent);
  if (it != cache.end()) return it->second;
  RunConfig cfg = RunConfig::defaults(EnvKind::cartpole, agent);
  cfg.seed = kCartPoleSeed;
  cfg.oracle.p_feedback = 0.6;
  cfg.oracle.p_error = 0.0;
  Taught t;
  t.session = std::make_unique<Session>(cfg, make_oracle_teacher(cfg));
  t.untrained = mean(t.session->evaluate(9, cfg.eval_init, 12345));
  for (int ep = 1; ep <= 50; ++ep)
    if (t.session->run_teaching_episode().eval_mean_reward >= 195.0) {
      t.first = ep;
      break;
    }
  return cache.emplace(agent, std::move(t)).first->second;
}

Outcome cartpole_solved(AgentKind agent) {
  auto& t = teach_cartpole(agent);
  const bool ok = t.first > 0 && t.untrained < 195.0;
  std::string d = "untrained eval " + fmt("%.1f", t.untrained) + ", ";
  d += t.first > 0 ? "eval >= 195 after teaching episode " + std::to_string(t.first) + " (limit 50)"
                   : "eval never reached 195 in 50 episodes";
  return {ok, d};
}

Outcome iil_vs_rl() {
  const int tips = teach_cartpole(AgentKind::tips).first;
  const int dcoach = teach_cartpole(AgentKind::dcoach).first;
  if (tips < 0 || dcoach < 0) return {false, "an interactive learner did not solve Cart-Pole"};
  const int iil = std::max(tips, dcoach);
  RunConfig cfg = RunConfig::defaults(EnvKind::cartpole, AgentKind::dqn);
  cfg.seed = kCartPoleSeed;
  cfg.dqn.alpha = 1e-2;  // plain SGD barely moves at the default 1e-4
  cfg.episodes = 1500;
  const auto res = run_dqn_baseline(cfg, 195.0);
  const bool reached = !res.metrics.empty() && res.metrics.back().eval_mean_reward >= 195.0;
  const int dqn = reached ? res.metrics.back().episode_index : cfg.episodes + 1;
  std::string d = "IIL " + std::to_string(iil) + " episodes (TIPS " + std::to_string(tips) + ", DCOACH " +
                  std::to_string(dcoach) + "), DQN " +
                  (reached ? std::to_string(dqn) + " episodes" : "not solved in " + std::to_string(cfg.episodes)) +
                  ", ratio " + fmt("%.1f", double(dqn) / iil) + " (need >= 5)";
  return {dqn >= 5 * iil, d};
}

Outcome deterministic_identity() {
  std::string d;
  bool ok = true;
  for (AgentKind agent : {AgentKind::tips, AgentKind::dcoach}) {
    auto& t = teach_cartpole(agent);
    const auto before = t.session->agent().policy().parameter_hash();
    for (const StateVec& init : {StateVec{0, 0, 0, 0}, StateVec{0.03, -0.02, 0.04, 0.01}}) {
      const auto r = t.session->evaluate(100, InitSpec::fixed(init), 77);
      const bool same = std::all_of(r.begin(), r.end(), [&](double v) { return v == r.front(); });
      ok = ok && same;
      d += (d.empty() ? "" : ", ") + to_string(agent) + " " + (same ? "100 x " + fmt("%.0f", r.front()) : "varied");
    }
    ok = ok && t.session->agent().policy().parameter_hash() == before;
  }
  // a solved policy sits at the 200 cap anyway; a partly trained one does not
  RunConfig cfg = RunConfig::defaults(EnvKind::cartpole, AgentKind::tips);
  cfg.seed = kCartPoleSeed;
  Session partial(cfg, make_oracle_teacher(cfg));
  partial.run(2);
  const auto r = partial.evaluate(100, InitSpec::fixed({0, 0, 0, 0}), 78);
  const bool same = std::all_of(r.begin(), r.end(), [&](double v) { return v == r.front(); });
  ok = ok && same && r.front() < 200.0;
  d += ", partly trained tips " + (same ? "100 x " + fmt("%.0f", r.front()) : std::string("varied"));
  return {ok, d};
}

Outcome variance_sweep() {
  RunConfig cfg = RunConfig::defaults(EnvKind::cartpole, AgentKind::tips);
  cfg.seed = kCartPoleSeed;
  Session s(cfg, make_oracle_teacher(cfg));
  s.run(2);  // partly trained, so rewards still depend on the start
  const std::vector<double> widths{0.05, 0.02, 0.01, 5e-3, 1e-4, 0.0};
  std::vector<double> med;
  for (double w : widths) {
    std::vector<double> vars;
    for (std::uint64_t seed : {1, 2, 3}) vars.push_back(sample_var(s.evaluate(50, InitSpec::uniform(w), seed)));
    med.push_back(median(vars));
  }
  bool ok = med.back() == 0.0;
  std::string d = "median variance";
  for (std::size_t k = 0; k < med.size(); ++k) {
    if (k > 0 && med[k] > med[k - 1]) ok = false;
    d += " " + fmt("%g", widths[k]) + ":" + fmt("%.1f", med[k]);
  }
  return {ok, d};
}

Outcome reinforce() {
  RunConfig cfg = RunConfig::defaults(EnvKind::cartpole, AgentKind::tips);
  cfg.seed = kCartPoleSeed;
  Session s(cfg, make_oracle_teacher(cfg));
  s.run(3);
  // weakest corner of the default start box
  StateVec weak;
  double weak_r = 1e9;
  for (double a : {-0.05, 0.0, 0.05})
    for (double b : {-0.05, 0.0, 0.05})
      for (double c : {-0.05, 0.0, 0.05})
        for (double e : {-0.05, 0.0, 0.05}) {
          const StateVec st{a, b, c, e};
          const double r = s.evaluate(1, InitSpec::fixed(st), 0).front();
          if (r < weak_r) weak_r = r, weak = st;
        }
  const double random_before = mean(s.evaluate(100, InitSpec::uniform(0.05), 99));
  reinforce_train(s, {weak}, 10);
  const double after = s.evaluate(1, InitSpec::fixed(weak), 0).front();
  const double random_after = mean(s.evaluate(100, InitSpec::uniform(0.05), 99));
  const bool ok = after > weak_r && random_after >= 0.95 * random_before;
  return {ok, "weak start " + fmt("%.0f", weak_r) + " -> " + fmt("%.0f", after) + ", random-start mean " +
                  fmt("%.1f", random_before) + " -> " + fmt("%.1f", random_after)};
}

// ---- Reacher ---------------------------------------------------------------

Outcome reacher_two_level() {
  std::vector<double> single, two;
  for (std::uint64_t seed : {0, 1, 2})
    for (bool level : {false, true}) {
      RunConfig cfg = RunConfig::defaults(EnvKind::reacher, AgentKind::tips);
      cfg.seed = seed;
      cfg.oracle.two_level = level;
      Session s(cfg, make_oracle_teacher(cfg));
      const auto m = s.run(50);
      double last = 0;
      for (std::size_t k = m.size() - 10; k < m.size(); ++k) last += m[k].eval_mean_reward / 10.0;
      (level ? two : single).push_back(last);
    }
  const double ms = median(single), mt = median(two);
  const double gain = (mt - ms) / std::abs(ms);  // rewards are negative
  std::string d = "final-10 median single " + fmt("%.3f", ms) + ", two-level " + fmt("%.3f", mt) + ", gain " +
                  fmt("%.1f%%", 100 * gain) + " (need >= 20%); per seed";
  for (std::size_t k = 0; k < 3; ++k) d += " " + fmt("%.3f", single[k]) + "/" + fmt("%.3f", two[k]);
  return {gain >= 0.20, d};
}

// ---- Lander ----------------------------------------------------------------

Outcome gaussian_ordering() {
  const int cap = 120;
  std::vector<int> det, gauss;
  for (std::uint64_t seed : {0, 1, 2})
    for (double sigma : {0.0, 0.2}) {
      RunConfig cfg = RunConfig::defaults(EnvKind::lander_continuous, AgentKind::tips);
      cfg.seed = seed;
      cfg.tips.sigma = sigma;
      Session s(cfg, make_oracle_teacher(cfg));
      int hit = cap + 1;
      for (int ep = 1; ep <= cap; ++ep)
        if (s.run_teaching_episode().eval_mean_reward >= 200.0) {
          hit = ep;
          break;
        }
      (sigma > 0 ? gauss : det).push_back(hit);
    }
  const int md = median(det), mg = median(gauss);
  std::string d = "median first episode >= 200: sigma 0 -> " + std::to_string(md) + ", sigma 0.2 -> " +
                  std::to_string(mg) + "; per seed";
  for (std::size_t k = 0; k < 3; ++k) d += " " + std::to_string(det[k]) + "/" + std::to_string(gauss[k]);
  return {mg <= md && mg <= cap, d};
}

// ---- buffers ---------------------------------------------------------------

Outcome buffers() {
  Rng rng(5);
  int fifo_bad = 0;
  std::uniform_int_distribution<int> cap_d(1, 50), len_d(0, 300);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t cap = cap_d(rng);
    BoundedBuffer<int> b(cap);
    std::list<int> ref;
    for (int k = len_d(rng); k > 0; --k) {
      const int v = static_cast<int>(rng() % 1000);
      b.push(v);
      ref.push_back(v);
      if (ref.size() > cap) ref.pop_front();
    }
    fifo_bad += !std::equal(b.begin(), b.end(), ref.begin(), ref.end());
  }
  BoundedBuffer<int> b(100);
  for (int v = 0; v < 100; ++v) b.push(v);
  const int n = 10000;
  const double expect = n / 100.0, sd = std::sqrt(n * 0.01 * 0.99);
  auto draw_stats = [&](Rng& r, int& outside, double& chi2) {
    std::vector<int> counts(100, 0);
    for (int v : b.sample(n, r)) counts[v]++;
    outside = 0;
    chi2 = 0;
    for (int c : counts) {
      outside += std::abs(c - expect) > 3 * sd;
      chi2 += (c - expect) * (c - expect) / expect;
    }
  };
  int outside = 0;
  double chi2 = 0;
  Rng fixed(2);
  draw_stats(fixed, outside, chi2);
  // a single draw flags some item about a quarter of the time, so also check
  // the flag rate and the mean chi-square over many seeds
  int flagged = 0;
  double chi_mean = 0;
  const int seeds = 200;
  for (int k = 0; k < seeds; ++k) {
    Rng r(1000 + k);
    int o = 0;
    double c = 0;
    draw_stats(r, o, c);
    flagged += o > 0;
    chi_mean += c / seeds;
  }
  const bool calibrated = flagged <= 0.35 * seeds && std::abs(chi_mean - 99.0) <= 3 * std::sqrt(2 * 99.0 / seeds);
  bool empty_raises = false;
  try {
    BoundedBuffer<int>(3).sample(1, rng);
  } catch (const EmptyBuffer&) {
    empty_raises = true;
  }
  return {fifo_bad == 0 && outside == 0 && calibrated && empty_raises,
          "500 FIFO traces, " + std::to_string(fifo_bad) + " mismatches; " + std::to_string(outside) +
              "/100 sample counts outside 3 sd; over " + std::to_string(seeds) + " seeds " + std::to_string(flagged) +
              " draws flagged, mean chi2 " + fmt("%.1f", chi_mean) + " (df 99)"};
}

struct Criterion {
  std::string name;
  double limit_s;  // 0 = no runtime limit
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"gradient-check", 10, gradient_check},
      {"fdm-fidelity", 120, fdm_fidelity},
      {"encoding-exactness", 0, encoding_exactness},
      {"tips-cartpole", 300, [] { return cartpole_solved(AgentKind::tips); }},
      {"dcoach-cartpole", 300, [] { return cartpole_solved(AgentKind::dcoach); }},
      {"iil-vs-rl", 900, iil_vs_rl},
      {"deterministic-identity", 0, deterministic_identity},
      {"variance-sweep", 0, variance_sweep},
      {"reinforce", 0, reinforce},
      {"reacher-two-level", 600, reacher_two_level},
      {"gaussian-ordering", 0, gaussian_ordering},
      {"buffers", 1, buffers},
  };
  int failed = 0, ran = 0;
  for (const auto& c : all) {
    bool selected = argc < 2;
    for (int i = 1; i < argc; ++i) selected = selected || c.name.find(argv[i]) != std::string::npos;
    if (!selected) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0 && secs > c.limit_s) {
      o.pass = false;
      o.detail += "; over the " + fmt("%.0f", c.limit_s) + " s limit";
    }
    std::printf("%s %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
    ++ran;
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
