#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "iil/envs.hpp"

using namespace iil;

namespace {

const double kPi = std::numbers::pi;

ActionVec push(std::size_t i) { return ActionVec::one_hot(2, i); }

// Textbook cart-pole step, written out separately from the library.
std::vector<double> cartpole_reference_step(const std::vector<double>& s, bool right) {
  const double g = 9.8, mc = 1.0, mp = 0.1, l = 0.5, dt = 0.02;
  double f = right ? 10.0 : -10.0;
  double th = s[2], w = s[3];
  double tmp = (f + mp * l * w * w * std::sin(th)) / (mc + mp);
  double alpha = (g * std::sin(th) - std::cos(th) * tmp) / (l * (4.0 / 3.0 - mp * std::cos(th) * std::cos(th) / (mc + mp)));
  double acc = tmp - mp * l * alpha * std::cos(th) / (mc + mp);
  return {s[0] + dt * s[1], s[1] + dt * acc, th + dt * w, w + dt * alpha};
}

// Forward kinematics by composing rotations as complex numbers.
std::complex<double> fk_complex(double t1, double t2) {
  auto r1 = std::polar(1.0, t1);
  auto r2 = std::polar(1.0, t2);
  return 0.1 * r1 + 0.11 * r1 * r2;
}

}  // namespace

TEST_CASE("environment names") {
  for (auto k : {EnvKind::cartpole, EnvKind::reacher, EnvKind::lander_discrete, EnvKind::lander_continuous})
    CHECK(env_kind_from_string(to_string(k)) == k);
  CHECK(to_string(EnvKind::lander_continuous) == "lander-continuous");
  CHECK_THROWS_AS(env_kind_from_string("pong"), ConfigError);
}

TEST_CASE("cart-pole reset") {
  CartPole env;
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    auto s = env.reset(InitSpec::uniform(0.05), rng);
    REQUIRE(s.size() == 4);
    for (double v : s) CHECK(std::abs(v) <= 0.05);
  }
  CHECK(env.reset(InitSpec::fixed({0, 0, 0, 0}), rng) == StateVec{0, 0, 0, 0});
  for (int k = 0; k < 1000; ++k)
    for (double v : env.reset(InitSpec::uniform(1e-6), rng)) CHECK(std::abs(v) <= 1e-6);
  CHECK_THROWS_AS(env.reset(InitSpec::fixed({0, 0, 0}), rng), ShapeError);
  CHECK_THROWS_AS(InitSpec::uniform(-1.0), ConfigError);
}

TEST_CASE("cart-pole step matches textbook dynamics") {
  CartPole env;
  Rng rng(2);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int k = 0; k < 100; ++k) {
    StateVec s{u(rng), u(rng), u(rng), u(rng)};
    for (bool right : {false, true}) {
      auto got = env.true_transition(s, push(right));
      auto want = cartpole_reference_step(s, right);
      for (int i = 0; i < 4; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-12);
    }
  }
}

TEST_CASE("cart-pole upright step") {
  CartPole env;
  Rng rng(3);
  env.reset(InitSpec::fixed({0, 0, 0, 0}), rng);
  auto r = env.step(push(0));
  CHECK(r.reward == 1.0);
  CHECK_FALSE(r.done);
  CHECK(r.done_reason == DoneReason::none);
  CHECK(r.next_state == env.true_transition({0, 0, 0, 0}, push(0)));
  CHECK_THROWS_AS(env.step(ActionVec::continuous({0.0, 1.0})), ActionKindError);
}

TEST_CASE("cart-pole mirror symmetry") {
  CartPole env;
  Rng rng(4);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (int k = 0; k < 50; ++k) {
    StateVec s{u(rng), u(rng), u(rng), u(rng)};
    StateVec m{-s[0], -s[1], -s[2], -s[3]};
    auto a = env.true_transition(s, push(0));
    auto b = env.true_transition(m, push(1));
    for (int i = 0; i < 4; ++i) CHECK(a[i] == doctest::Approx(-b[i]).epsilon(1e-12));
  }
  auto l = env.true_transition({0, 0, 0, 0}, push(0));
  auto r = env.true_transition({0, 0, 0, 0}, push(1));
  for (int i = 0; i < 4; ++i) CHECK(l[i] == -r[i]);
  CHECK(env.true_transition({0.1, 0, 0.02, 0}, push(1)) == env.true_transition({0.1, 0, 0.02, 0}, push(1)));
}

TEST_CASE("cart-pole termination") {
  CartPole env;
  Rng rng(5);
  env.reset(InitSpec::fixed({0, 0, 0.2, 0.5}), rng);
  auto r = env.step(push(1));
  CHECK(r.done);
  CHECK(r.done_reason == DoneReason::pole_fell);

  env.reset(InitSpec::fixed({2.39, 1.0, 0, 0}), rng);
  r = env.step(push(1));
  CHECK(r.done_reason == DoneReason::out_of_bounds);

  // alternate pushes keep the pole up; the episode ends at the cap
  env.reset(InitSpec::fixed({0, 0, 0, 0}), rng);
  double total = 0;
  int t = 0;
  do {
    const auto& s = env.state();
    r = env.step(push(s[2] + 0.5 * s[3] > 0));
    total += r.reward;
    ++t;
  } while (!r.done);
  CHECK(t == 200);
  CHECK(total == 200.0);
  CHECK(r.done_reason == DoneReason::time_limit);
}

TEST_CASE("cart-pole episode reward range") {
  CartPole env;
  Rng rng(6);
  std::bernoulli_distribution coin(0.5);
  for (int ep = 0; ep < 30; ++ep) {
    env.reset(InitSpec::uniform(0.05), rng);
    double total = 0;
    StepResult r;
    do {
      r = env.step(push(coin(rng)));
      total += r.reward;
    } while (!r.done);
    CHECK(total >= 1);
    CHECK(total <= 200);
    CHECK((total == 200) == (r.done_reason == DoneReason::time_limit));
  }
}

TEST_CASE("reacher end effector") {
  Reacher env;
  auto p = reacher_end_effector(env.make_state(0, 0));
  CHECK(p.x == doctest::Approx(0.21));
  CHECK(std::abs(p.y) < 1e-12);
  p = reacher_end_effector(env.make_state(kPi / 2, 0));
  CHECK(std::abs(p.x) < 1e-12);
  CHECK(p.y == doctest::Approx(0.21));

  Rng rng(7);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int k = 0; k < 100; ++k) {
    double t1 = u(rng), t2 = u(rng);
    auto q = reacher_end_effector(env.make_state(t1, t2));
    auto want = fk_complex(t1, t2);
    CHECK(std::abs(q.x - want.real()) < 1e-10);
    CHECK(std::abs(q.y - want.imag()) < 1e-10);
  }

  StateVec bad = env.make_state(0, 0);
  bad[0] = 0;
  bad[2] = 0;
  CHECK_THROWS_AS(reacher_end_effector(bad), InvalidState);
}

TEST_CASE("reacher observation layout and reward") {
  Reacher env;
  Rng rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int ep = 0; ep < 5; ++ep) {
    env.reset(env.default_init(), rng);
    StepResult r;
    int t = 0;
    do {
      r = env.step(ActionVec::continuous({u(rng), u(rng)}));
      ++t;
      const auto& n = r.next_state;
      REQUIRE(n.size() == 11);
      for (auto i : kReacherZeroedIndices) CHECK(n[i] == 0.0);
      CHECK(std::abs(n[0] * n[0] + n[2] * n[2] - 1) < 1e-9);
      CHECK(std::abs(n[1] * n[1] + n[3] * n[3] - 1) < 1e-9);
      auto p = reacher_end_effector(n);
      CHECK(r.reward <= 0.0);
      CHECK(std::abs(r.reward + std::hypot(p.x - 0.1, p.y - 0.1)) < 1e-9);
    } while (!r.done);
    CHECK(t == 50);
    CHECK(r.done_reason == DoneReason::time_limit);
  }
}

TEST_CASE("reacher on target gives zero reward") {
  Reacher env;
  // two-link inverse kinematics for the target (0.1, 0.1)
  const double l1 = 0.1, l2 = 0.11, x = 0.1, y = 0.1;
  double c2 = (x * x + y * y - l1 * l1 - l2 * l2) / (2 * l1 * l2);
  double t2 = std::acos(c2);
  double t1 = std::atan2(y, x) - std::atan2(l2 * std::sin(t2), l1 + l2 * std::cos(t2));
  Rng rng(9);
  env.reset(InitSpec::fixed(env.make_state(t1, t2)), rng);
  auto r = env.step(ActionVec::continuous({0.0, 0.0}));
  CHECK(std::abs(r.reward) < 1e-12);
  CHECK(env.distance_to_target(r.next_state) < 1e-12);
}

TEST_CASE("reacher kinematic step") {
  Reacher env;
  auto s = env.make_state(0.3, -0.4);
  auto n = env.true_transition(s, ActionVec::continuous({1.0, -0.5}));
  auto [t1, t2] = reacher_joint_angles(n);
  CHECK(t1 == doctest::Approx(0.3 + 0.05));
  CHECK(t2 == doctest::Approx(-0.4 - 0.025));
  // actions beyond the bounds are clipped
  CHECK(env.true_transition(s, ActionVec::continuous({3.0, -0.5})) == n);
}

TEST_CASE("lander decode") {
  Lander c(true);
  auto cmd = c.decode(ActionVec::continuous({-0.5, 0.3}));
  CHECK(cmd.main == 0.0);
  CHECK(cmd.side == 0.0);
  cmd = c.decode(ActionVec::continuous({0.0, -0.5}));
  CHECK(cmd.main == 0.0);
  CHECK(cmd.side == 0.0);
  cmd = c.decode(ActionVec::continuous({0.6, 0.8}));
  CHECK(cmd.main == doctest::Approx(0.8));
  CHECK(cmd.side == doctest::Approx(0.8));
  cmd = c.decode(ActionVec::continuous({1.0, -0.9}));
  CHECK(cmd.main == doctest::Approx(1.0));
  CHECK(cmd.side == doctest::Approx(-0.9));

  Lander d(false);
  CHECK(d.decode(ActionVec::one_hot(4, 0)).main == 0.0);
  CHECK(d.decode(ActionVec::one_hot(4, 1)).side == -1.0);
  CHECK(d.decode(ActionVec::one_hot(4, 2)).main == 1.0);
  CHECK(d.decode(ActionVec::one_hot(4, 3)).side == 1.0);
  CHECK_THROWS_AS(d.decode(ActionVec::continuous({0, 0, 0, 0})), ActionKindError);
}

TEST_CASE("lander main engine fuel cost") {
  Lander env(true);
  Rng rng(10);
  auto s = env.reset(InitSpec::fixed(env.nominal_start()), rng);
  auto r = env.step(ActionVec::continuous({0.6, 0.0}));
  double shaping = env.potential(r.next_state) - env.potential(s);
  CHECK(r.reward == doctest::Approx(shaping - 0.3));

  env.reset(InitSpec::fixed(env.nominal_start()), rng);
  auto idle = env.step(ActionVec::continuous({-1.0, 0.0}));
  CHECK(idle.reward == doctest::Approx(env.potential(idle.next_state) - env.potential(s)));
}

TEST_CASE("lander contacts are binary") {
  Lander env(false);
  Rng rng(11);
  std::uniform_int_distribution<std::size_t> pick(0, 3);
  for (int ep = 0; ep < 10; ++ep) {
    env.reset(env.default_init(), rng);
    StepResult r;
    do {
      r = env.step(ActionVec::one_hot(4, pick(rng)));
      CHECK((r.next_state[6] == 0.0 || r.next_state[6] == 1.0));
      CHECK((r.next_state[7] == 0.0 || r.next_state[7] == 1.0));
    } while (!r.done);
    CHECK(r.done_reason != DoneReason::none);
  }
}

TEST_CASE("lander free fall crashes") {
  Lander env(false);
  Rng rng(12);
  env.reset(InitSpec::fixed(env.nominal_start()), rng);
  StepResult r;
  double total = 0;
  do {
    r = env.step(ActionVec::one_hot(4, 0));
    total += r.reward;
  } while (!r.done);
  CHECK(r.done_reason == DoneReason::crashed);
  CHECK(total < 0);
}

TEST_CASE("scripted PD landing scores above 200") {
  Lander env(true);
  Rng rng(13);
  for (int ep = 0; ep < 5; ++ep) {
    env.reset(env.default_init(), rng);
    double total = 0;
    StepResult r;
    do {
      const auto& s = env.state();
      double vy_target = -(0.1 + 0.35 * s[1]);
      double main = 4.0 * (vy_target - s[3]) + 0.4;
      double tilt = std::clamp(0.5 * s[0] + s[2], -0.4, 0.4);
      double side = 3.0 * (2.0 * (tilt - s[4]) - s[5]);
      // jump past the side-engine dead zone
      if (std::abs(side) < 0.15) side = 0;
      else side = std::copysign(std::min(0.5 + std::abs(side), 1.0), side);
      r = env.step(ActionVec::continuous({std::clamp(main, -1.0, 1.0), side}));
      total += r.reward;
    } while (!r.done);
    CAPTURE(ep);
    CHECK(r.done_reason == DoneReason::landed);
    CHECK(total > 200);
  }
}

TEST_CASE("determinism of trajectories") {
  auto run = [](std::uint64_t seed) {
    auto env = make_env(EnvKind::lander_continuous);
    Rng rng(seed);
    env->reset(env->default_init(), rng);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> trace;
    StepResult r;
    do {
      r = env->step(ActionVec::continuous({u(rng), u(rng)}));
      trace.insert(trace.end(), r.next_state.begin(), r.next_state.end());
      trace.push_back(r.reward);
    } while (!r.done);
    return trace;
  };
  CHECK(run(5) == run(5));
  CHECK(run(5) != run(6));
}
