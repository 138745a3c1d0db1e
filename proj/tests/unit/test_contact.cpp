#include <doctest.h>

#include "synthetic.hpp"
#include "t2m/contact.hpp"
#include "t2m/error.hpp"

#include <random>

using namespace t2m;
using namespace t2m::contact;

namespace {

// Rest pose with both feet (and only the feet) moved by `feet(t)`, root by
// `root(t)`; other joints ride along with the root.
MotionClip feet_clip(std::size_t T, const std::function<Vec3(std::size_t)>& root,
                     const std::function<Vec3(std::size_t, bool left)>& foot) {
  const auto rest = testing::rest_pose();
  return testing::scripted_clip(T, kHumanMLJoints, [&](std::size_t t, std::size_t j) {
    if (j == kLeftFoot) return foot(t, true);
    if (j == kRightFoot) return foot(t, false);
    return Vec3(rest[j] + root(t));
  });
}

}  // namespace

TEST_SUITE("contact") {
  TEST_CASE("pinned feet are in contact every frame") {
    const ContactConfig cfg;
    const auto clip = feet_clip(
        20, [](std::size_t) { return Vec3::Zero(); },
        [](std::size_t, bool left) { return Vec3(left ? 0.1 : -0.1, 0.01, 0.1); });
    const auto tr = detect_contacts(clip, cfg);
    for (std::size_t t = 0; t < 20; ++t) {
      CHECK(tr.left_contact[t] == 1);
      CHECK(tr.right_contact[t] == 1);
    }
    const auto fl = floating_intervals(tr, cfg);
    CHECK(fl.invalid_frames == 0);
    CHECK(fl.soft_intervals.empty());
    CHECK(fl.hard_intervals.empty());
  }

  TEST_CASE("raised feet never touch") {
    const auto clip = feet_clip(
        20, [](std::size_t) { return Vec3::Zero(); },
        [](std::size_t, bool left) { return Vec3(left ? 0.1 : -0.1, 0.5, 0.1); });
    const auto tr = detect_contacts(clip, ContactConfig{});
    for (std::size_t t = 0; t < 20; ++t) {
      CHECK(tr.left_contact[t] == 0);
      CHECK(tr.right_contact[t] == 0);
    }
  }

  TEST_CASE("fixed feet under a moving root give ratio one") {
    const auto clip = feet_clip(
        10, [](std::size_t t) { return Vec3(double(t), 0, 0); },
        [](std::size_t, bool left) { return Vec3(left ? 0.1 : -0.1, 0.0, 0.1); });
    const auto tr = detect_contacts(clip, ContactConfig{});
    // v_rel = -v_root, |v_root| = 1
    for (double r : tr.velocity_ratio) CHECK(r == doctest::Approx(1.0 / (1.0 + 1e-6)).epsilon(1e-12));
  }

  TEST_CASE("one hard interval spanning the clip") {
    ContactConfig cfg;
    cfg.float_height = 0.12;
    cfg.min_interval = 5;
    const auto clip = feet_clip(
        40, [](std::size_t) { return Vec3(0, 0.5, 0); },
        [](std::size_t, bool left) { return Vec3(left ? 0.1 : -0.1, 0.5, 0.1); });
    const auto fl = floating_intervals(detect_contacts(clip, cfg), cfg);
    REQUIRE(fl.hard_intervals.size() == 1);
    CHECK(fl.hard_intervals[0] == 40);
    CHECK(fl.soft_intervals.empty());
    CHECK(fl.invalid_frames == 0);
  }

  TEST_CASE("single-frame alternation yields no intervals") {
    ContactConfig cfg;
    const auto clip = feet_clip(
        40, [](std::size_t) { return Vec3::Zero(); },
        [](std::size_t t, bool left) { return Vec3(left ? 0.1 : -0.1, t % 2 ? 0.5 : 0.0, 0.1); });
    const auto fl = floating_intervals(detect_contacts(clip, cfg), cfg);
    CHECK(fl.soft_intervals.empty());
    CHECK(fl.hard_intervals.empty());
  }

  TEST_CASE("classification properties on random tracks") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> h(-0.02, 0.4);
    ContactConfig cfg;
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t T = 2 + rng() % 80;
      std::vector<double> hl(T), hr(T);
      // piecewise-constant heights so that runs actually form
      double a = h(rng), b = h(rng);
      for (std::size_t t = 0; t < T; ++t) {
        if (rng() % 7 == 0) a = h(rng);
        if (rng() % 7 == 0) b = h(rng);
        hl[t] = a;
        hr[t] = b;
      }
      const auto clip = feet_clip(
          T, [](std::size_t) { return Vec3::Zero(); },
          [&](std::size_t t, bool left) { return Vec3(left ? 0.1 : -0.1, left ? hl[t] : hr[t], 0.1); });
      const auto tr = detect_contacts(clip, cfg);
      const auto fl = floating_intervals(tr, cfg);
      std::size_t classified = fl.invalid_frames;
      for (auto len : fl.soft_intervals) {
        CHECK(len >= cfg.min_interval);
        classified += len;
      }
      for (auto len : fl.hard_intervals) {
        CHECK(len >= cfg.min_interval);
        classified += len;
      }
      CHECK(classified <= T);

      // translation invariance of the contact decision
      const auto moved = detect_contacts(clip.translated(Vec3(3.5, 0, -7.25)), cfg);
      CHECK(moved.left_contact == tr.left_contact);
      CHECK(moved.right_contact == tr.right_contact);

      // stretching heights above h_float keeps classification
      const auto stretched = feet_clip(
          T, [](std::size_t) { return Vec3::Zero(); }, [&](std::size_t t, bool left) {
            double y = left ? hl[t] : hr[t];
            if (y > cfg.float_height) y *= 2.5;
            return Vec3(left ? 0.1 : -0.1, y, 0.1);
          });
      const auto fl2 = floating_intervals(detect_contacts(stretched, cfg), cfg);
      CHECK(fl2.classes == fl.classes);
    }
  }

  TEST_CASE("too short and bad config") {
    const auto one = feet_clip(
        1, [](std::size_t) { return Vec3::Zero(); }, [](std::size_t, bool) { return Vec3::Zero(); });
    try {
      detect_contacts(one, ContactConfig{});
      FAIL("expected TooShort");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::TooShort);
    }
    ContactConfig bad;
    bad.contact_height = -1;
    CHECK_THROWS_AS(bad.validate(22), Error);
  }
}
