#include <doctest.h>

#include "synthetic.hpp"
#include "t2m/corpus.hpp"
#include "t2m/error.hpp"
#include "t2m/npy.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <random>

using namespace t2m;

namespace {

// Hand-assembled v1.0 image: magic, version, little-endian header length,
// dict padded with spaces and terminated by '\n', then payload.
std::string npy_image(const std::string& dict, std::size_t payload_bytes) {
  std::string header = dict;
  while ((10 + header.size() + 1) % 64 != 0) header += ' ';
  header += '\n';
  std::string out = "\x93NUMPY";
  out += '\x01';
  out += '\x00';
  out += static_cast<char>(header.size() & 0xff);
  out += static_cast<char>(header.size() >> 8);
  out += header;
  out.append(payload_bytes, '\0');
  return out;
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected t2m::Error");
  return Errc::Config;
}

}  // namespace

TEST_SUITE("npy") {
  TEST_CASE("f4 header with 24 payload bytes parses as 2x3") {
    std::string img = npy_image("{'descr':'<f4','fortran_order':False,'shape':(2,3)}", 0);
    const float vals[6] = {1, 2, 3, 4, 5, 6};
    img.append(reinterpret_cast<const char*>(vals), sizeof vals);
    const auto a = npy::parse(img);
    CHECK(a.shape == std::vector<std::size_t>{2, 3});
    CHECK(a.dtype() == npy::Dtype::F32);
    const auto v = a.to_f64();
    REQUIRE(v.size() == 6);
    for (int i = 0; i < 6; ++i) CHECK(v[i] == vals[i]);
  }

  TEST_CASE("payload size mismatch") {
    const auto img = npy_image("{'descr':'<f4','fortran_order':False,'shape':(2,3)}", 20);
    CHECK(code_of([&] { npy::parse(img); }) == Errc::ShapeHeaderMalformed);
  }

  TEST_CASE("big endian and integer dtypes rejected") {
    CHECK(code_of([] {
            npy::parse(npy_image("{'descr':'>f4','fortran_order':False,'shape':(2,)}", 8));
          }) == Errc::UnsupportedDtype);
    CHECK(code_of([] {
            npy::parse(npy_image("{'descr':'<i8','fortran_order':False,'shape':(2,)}", 16));
          }) == Errc::UnsupportedDtype);
  }

  TEST_CASE("fortran order rejected") {
    CHECK(code_of([] {
            npy::parse(npy_image("{'descr':'<f8','fortran_order':True,'shape':(2,2)}", 32));
          }) == Errc::FortranOrderUnsupported);
  }

  TEST_CASE("bad magic") {
    std::string img = npy_image("{'descr':'<f8','fortran_order':False,'shape':(1,)}", 8);
    img[1] = 'X';
    CHECK(code_of([&] { npy::parse(img); }) == Errc::MagicMismatch);
    CHECK(code_of([] { npy::parse("short"); }) == Errc::MagicMismatch);
  }

  TEST_CASE("numpy-style header with spaces and trailing comma") {
    const auto img =
        npy_image("{'descr': '<f8', 'fortran_order': False, 'shape': (3,), }", 24);
    const auto a = npy::parse(img);
    CHECK(a.shape == std::vector<std::size_t>{3});
    CHECK(a.dtype() == npy::Dtype::F64);
  }

  TEST_CASE("serialized header is 64-byte aligned with v1.0 layout") {
    const auto bytes = npy::serialize(npy::make_f64({4, 5}, std::vector<double>(20, 1.5)));
    CHECK(bytes.substr(0, 6) == "\x93NUMPY");
    CHECK(bytes[6] == '\x01');
    CHECK(bytes[7] == '\x00');
    const std::size_t hlen = static_cast<unsigned char>(bytes[8]) |
                             (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
    CHECK((10 + hlen) % 64 == 0);
    CHECK(bytes[10 + hlen - 1] == '\n');
    CHECK(bytes.size() == 10 + hlen + 20 * 8);
  }

  TEST_CASE("round trip is bit identical for random arrays") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t a = 1 + rng() % 7, b = 1 + rng() % 5;
      std::vector<double> d(a * b);
      for (auto& x : d) x = u(rng);
      std::vector<float> f(d.begin(), d.end());
      for (const auto& arr : {npy::make_f64({a, b}, d), npy::make_f32({a, b, 1}, f)}) {
        const auto once = npy::serialize(arr);
        const auto back = npy::parse(once);
        CHECK(back.shape == arr.shape);
        CHECK(npy::serialize(back) == once);
      }
    }
    // non-finite payloads survive byte for byte too
    const double odd[3] = {std::numeric_limits<double>::quiet_NaN(), -0.0,
                           std::numeric_limits<double>::infinity()};
    const auto img = npy::serialize(npy::make_f64({3}, {odd, odd + 3}));
    CHECK(npy::serialize(npy::parse(img)) == img);
  }

  TEST_CASE("missing file") {
    CHECK(code_of([] { npy::load("/nonexistent/x.npy"); }) == Errc::MissingFile);
  }
}

TEST_SUITE("npy") {
  TEST_CASE("corpus loads one clip and groups prompts") {
    testing::TempDir dir;
    std::vector<testing::ClipEntry> entries(3);
    for (int i = 0; i < 3; ++i) {
      entries[i].clip_id = "c" + std::to_string(2 - i);  // reverse order on disk
      entries[i].prompt_id = i < 2 ? "shared" : "solo";
      entries[i].baseline_id = "B";
      entries[i].joints = testing::posed_clip(std::vector<Vec3>(40, Vec3::Zero()),
                                              std::vector<double>(40, 0.0));
    }
    const auto manifest = testing::write_corpus(dir.path(), entries);
    const auto load = load_corpus(manifest);
    REQUIRE(load.corpus.size() == 3);
    CHECK(load.corpus.clips()[0].clip_id == "c0");
    CHECK(load.corpus.clips()[2].clip_id == "c2");
    CHECK(load.corpus.clips()[0].motion->frames() == 40);
    CHECK(load.corpus.by_prompt().at("shared").size() == 2);
    CHECK(load.corpus.by_prompt().at("solo").size() == 1);
  }

  TEST_CASE("corpus rejects 21 joints") {
    testing::TempDir dir;
    npy::save(dir / "j.npy", npy::make_f64({40, 21, 3}, std::vector<double>(40 * 21 * 3, 0.1)));
    testing::write_json(dir / "manifest.json",
                        R"({"a":{"prompt_id":"p","baseline_id":"b","joints":"j.npy","fps":20}})");
    CHECK(code_of([&] { load_corpus(dir / "manifest.json"); }) == Errc::InvariantViolation);
    const auto lenient = load_corpus(dir / "manifest.json", LoadPolicy::Lenient);
    CHECK(lenient.corpus.empty());
    REQUIRE(lenient.failures.size() == 1);
    CHECK(lenient.failures[0].clip_id == "a");
  }

  TEST_CASE("corpus order ignores manifest permutation") {
    testing::TempDir dir;
    npy::save(dir / "j.npy", npy::make_f64({3, 22, 3}, std::vector<double>(3 * 22 * 3, 0.2)));
    testing::write_json(dir / "m1.json",
                        R"({"z":{"prompt_id":"p","baseline_id":"b","joints":"j.npy"},
                            "a":{"prompt_id":"q","baseline_id":"b","joints":"j.npy"}})");
    testing::write_json(dir / "m2.json",
                        R"({"a":{"prompt_id":"q","baseline_id":"b","joints":"j.npy"},
                            "z":{"prompt_id":"p","baseline_id":"b","joints":"j.npy"}})");
    const auto a = load_corpus(dir / "m1.json").corpus;
    const auto b = load_corpus(dir / "m2.json").corpus;
    REQUIRE(a.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) CHECK(a.clips()[i].clip_id == b.clips()[i].clip_id);
    CHECK(a.clips()[0].fps == 20.0);
  }

  TEST_CASE("targets parse and validate") {
    const auto tr = parse_targets(nlohmann::json::parse(
        R"([{"prompt_id":"p","kind":"root_translation","target":[0.0,0.0,-2.8]}])"));
    REQUIRE(tr.size() == 1);
    CHECK(tr[0].kind() == TargetKind::RootTranslation);
    CHECK(std::get<TranslationTarget>(tr[0].target).displacement.z() == -2.8);

    const auto vel = parse_targets(nlohmann::json::parse(
        R"([{"prompt_id":"p","kind":"directional_velocity","speed":2.0,"direction":[0,0,1],"duration":1.5}])"));
    REQUIRE(vel.size() == 1);
    const auto& v = std::get<VelocityTarget>(vel[0].target);
    CHECK(v.speed == 2.0);
    CHECK(v.duration == 1.5);

    CHECK(code_of([] {
            parse_targets(nlohmann::json::parse(R"([{"prompt_id":"p","kind":"yaw_rotation"}])"));
          }) == Errc::MissingField);
    CHECK(code_of([] {
            parse_targets(nlohmann::json::parse(R"([{"prompt_id":"p","kind":"spin","angle":1}])"));
          }) == Errc::UnknownKind);
    CHECK(code_of([] {
            parse_targets(nlohmann::json::parse(
                R"([{"prompt_id":"p","kind":"directional_velocity","speed":1,"direction":[0,0,2],"duration":1}])"));
          }) == Errc::NonUnitDirection);
    // small deviations are renormalized
    const auto near = parse_targets(nlohmann::json::parse(
        R"([{"prompt_id":"p","kind":"directional_velocity","speed":1,"direction":[0,0,1.0005],"duration":1}])"));
    CHECK(std::get<VelocityTarget>(near[0].target).direction.norm() ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK(code_of([] {
            parse_targets(nlohmann::json::parse(
                R"([{"prompt_id":"p","kind":"body_part_offset","base_joint":3,"target_joint":3,"target":[0,0,0]}])"));
          }) == Errc::BadJoints);
  }

  TEST_CASE("feature stats reject non-positive std") {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(kFeatureDim);
    Eigen::VectorXd sd = Eigen::VectorXd::Ones(kFeatureDim);
    sd[5] = 0.0;
    CHECK_THROWS_AS(FeatureStats(mean, sd), Error);
  }
}
