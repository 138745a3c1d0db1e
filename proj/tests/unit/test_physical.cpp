#include <doctest.h>

#include "synthetic.hpp"
#include "t2m/collision.hpp"
#include "t2m/error.hpp"
#include "t2m/physical.hpp"

#include <random>

using namespace t2m;
using namespace t2m::physical;

namespace {

MotionClip single_joint(const std::vector<Vec3>& p) {
  return testing::scripted_clip(p.size(), 1, [&](std::size_t t, std::size_t) { return p[t]; });
}

MotionClip walker(std::size_t T, std::uint64_t seed) {
  // rest pose carried forward with a little per-joint noise
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.01);
  const auto rest = testing::rest_pose(0.02);
  return testing::scripted_clip(T, kHumanMLJoints, [&](std::size_t t, std::size_t j) {
    return Vec3(rest[j] + Vec3(0.03 * double(t), 0.0, 0.01 * double(t)) + Vec3(n(rng), n(rng), n(rng)));
  });
}

}  // namespace

TEST_SUITE("physical") {
  TEST_CASE("constants") {
    CHECK(kPenetrationTolerance == 0.005);
    CHECK(kPoseQualityScale == 10.0);
    CHECK(contact::kEpsilon == 1e-6);
  }

  TEST_CASE("jitter degree") {
    CHECK(jitter_degree(single_joint({{0, 0, 0}, {0, 0, 0}, {1, 0, 0}, {3, 0, 0}})) ==
          doctest::Approx(1.0).epsilon(1e-12));
    const auto rest = testing::rest_pose();
    const auto cv = testing::scripted_clip(12, kHumanMLJoints, [&](std::size_t t, std::size_t j) {
      return Vec3(rest[j] + Vec3(0.2, 0.0, -0.1) * double(t));
    });
    CHECK(jitter_degree(cv) == doctest::Approx(0.0).epsilon(1e-12));
    const auto w = walker(30, 1);
    CHECK(jitter_degree(w.translated(Vec3(5, 0, 0))) == doctest::Approx(jitter_degree(w)).epsilon(1e-9));
    CHECK_THROWS_AS(jitter_degree(single_joint({{0, 0, 0}, {1, 0, 0}})), Error);
  }

  TEST_CASE("ground penetration") {
    CHECK(ground_penetration(walker(10, 2)) == 0.0);
    const auto clip = single_joint({{0, -0.02, 0}, {0, 0.10, 0}, {0, -0.001, 0}, {0, -0.006, 0}});
    CHECK(ground_penetration(clip) == doctest::Approx(0.0065).epsilon(1e-12));
    const auto deeper = single_joint({{0, -0.03, 0}, {0, 0.10, 0}, {0, -0.001, 0}, {0, -0.006, 0}});
    CHECK(ground_penetration(deeper) > ground_penetration(clip));
    // literal reading also counts the shallow sample and the -0.001 one
    CHECK(ground_penetration(clip, GroundMode::Literal) ==
          doctest::Approx((0.02 + 0.001 + 0.006) / 4).epsilon(1e-12));
  }

  TEST_CASE("foot floating") {
    const contact::ContactConfig cfg;
    const auto rest = testing::rest_pose();
    auto lifted = [&](double y) {
      return testing::scripted_clip(40, kHumanMLJoints, [&, y](std::size_t, std::size_t j) {
        return Vec3(rest[j] + Vec3(0, y, 0));
      });
    };
    CHECK(foot_floating(lifted(0.0), cfg) == 0.0);
    CHECK(foot_floating(lifted(0.5), cfg) == doctest::Approx(1.0));
    CHECK(foot_floating(lifted(0.08), cfg) == doctest::Approx(0.5));
  }

  TEST_CASE("foot sliding") {
    const auto rest = testing::rest_pose();
    const std::size_t T = 30;
    auto clip_with = [&](double left_step) {
      return testing::scripted_clip(T, kHumanMLJoints, [&, left_step](std::size_t t, std::size_t j) {
        Vec3 p = rest[j];
        if (j == contact::kLeftFoot) p.x() += left_step * double(t);
        if (j == contact::kRightFoot) p.y() += 0.5;
        return p;
      });
    };
    contact::ContactConfig cfg;
    CHECK(foot_sliding(clip_with(0.0), cfg) == 0.0);
    // the sliding foot must still count as grounded
    cfg.contact_speed = 0.05;
    const double fs = foot_sliding(clip_with(0.02), cfg);
    // oracle: left numerator 0.02*T over T + eps, right side 0
    const double expect = 0.5 * (0.02 * T / (T + 1e-6));
    CHECK(fs == doctest::Approx(expect).epsilon(1e-12));
    CHECK(fs == doctest::Approx(0.01).epsilon(1e-6));

    const auto air = testing::scripted_clip(T, kHumanMLJoints, [&](std::size_t, std::size_t j) {
      return Vec3(rest[j] + Vec3(0, 1, 0));
    });
    CHECK(foot_sliding(air, contact::ContactConfig{}) == 0.0);
  }

  TEST_CASE("dynamic degree") {
    const auto rest = testing::rest_pose();
    const auto still = testing::scripted_clip(8, kHumanMLJoints, [&](std::size_t, std::size_t j) { return rest[j]; });
    CHECK(dynamic_degree(still) == 0.0);
    CHECK(dynamic_degree(single_joint({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}})) == doctest::Approx(1.0));
    // drift raises only the global term
    const auto w = walker(20, 4);
    const auto drift = testing::scripted_clip(20, kHumanMLJoints, [&](std::size_t t, std::size_t j) {
      return Vec3(w.at(t, j) + Vec3(0.5 * double(t), 0, 0));
    });
    CHECK(dynamic_degree(drift) > dynamic_degree(w));
  }

  TEST_CASE("pose quality") {
    CHECK(pose_quality({{0, 0, 0}}) == 0.0);
    CHECK(pose_quality({{0.2, 0.2, 0.2}}) == doctest::Approx(2.0));
    CHECK(pose_quality({{0.1, 0.3}}) == doctest::Approx(2.0));
    try {
      pose_quality({});
      FAIL("expected EmptySeries");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::EmptySeries);
    }
  }

  TEST_CASE("body penetration") {
    // separated boxes
    std::vector<Vec3> v;
    std::vector<Face> f;
    testing::append_box(v, f, Vec3(0, 0, 0), 0.5);
    testing::append_box(v, f, Vec3(3, 0, 0), 0.5);
    CHECK(body_penetration(MeshSequence(1, v.size(), v, f)) == 0.0);

    // four triangles, one crossing pair
    std::vector<Vec3> tv = {{0, 0, 0}, {2, 0, 0}, {0, 2, 0},          // z = 0 plane
                            {0.5, 0.5, -1}, {0.5, 0.5, 1}, {1.5, 0.2, 0},  // pierces the first
                            {10, 0, 0}, {11, 0, 0}, {10, 1, 0},
                            {20, 0, 0}, {21, 0, 0}, {20, 1, 0}};
    std::vector<Face> tf = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {9, 10, 11}};
    const MeshSequence one(1, tv.size(), tv, tf);
    CHECK(bvh::count_colliding_pairs_brute_force(tv, tf) == 1);
    CHECK(body_penetration(one) == doctest::Approx(25.0));

    // duplicated frame leaves the average unchanged
    std::vector<Vec3> twice = tv;
    twice.insert(twice.end(), tv.begin(), tv.end());
    CHECK(body_penetration(MeshSequence(2, tv.size(), twice, tf)) == doctest::Approx(25.0));
  }

  TEST_CASE("translation invariances") {
    const contact::ContactConfig cfg;
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto w = walker(40, s);
      const auto h = w.translated(Vec3(4.25, 0, -1.5));
      const auto up = w.translated(Vec3(0, 0.75, 0));
      CHECK(jitter_degree(h) == doctest::Approx(jitter_degree(w)).epsilon(1e-9));
      CHECK(ground_penetration(h) == ground_penetration(w));
      CHECK(foot_floating(h, cfg) == foot_floating(w, cfg));
      CHECK(foot_sliding(h, cfg) == doctest::Approx(foot_sliding(w, cfg)).epsilon(1e-9));
      CHECK(dynamic_degree(h) == doctest::Approx(dynamic_degree(w)).epsilon(1e-9));
      CHECK(jitter_degree(up) == doctest::Approx(jitter_degree(w)).epsilon(1e-9));
      CHECK(dynamic_degree(up) == doctest::Approx(dynamic_degree(w)).epsilon(1e-9));
    }
  }

  TEST_CASE("feet well above the floor slide nothing when lifted together") {
    // FS is vertical-translation invariant as long as contact decisions are
    // unchanged; a pinned-foot clip stays at zero at any grounded height
    const auto rest = testing::rest_pose(0.01);
    const auto pinned = testing::scripted_clip(20, kHumanMLJoints, [&](std::size_t t, std::size_t j) {
      Vec3 p = rest[j];
      if (j != contact::kLeftFoot && j != contact::kRightFoot) p.x() += 0.02 * double(t);
      return p;
    });
    CHECK(foot_sliding(pinned, contact::ContactConfig{}) == 0.0);
    CHECK(ground_penetration(pinned) == 0.0);
  }
}
