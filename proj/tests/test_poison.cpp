#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "depthpoison/error.hpp"
#include "depthpoison/hashing.hpp"
#include "depthpoison/io.hpp"
#include "depthpoison/poison.hpp"
#include "depthpoison/scenegen.hpp"
#include "test_support.hpp"

using namespace depthpoison;
using depthpoison::testing::TempDir;
namespace fs = std::filesystem;

namespace {

// Small shared source dataset: 20 scenes with vehicles close enough for a 40 px trigger.
class PoisonTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        source_dir_ = new TempDir("src");
        SceneVariation v;
        v.vehicle_distance = ParamRange{8.0, 12.0};
        v.vehicle_lateral_offset = ParamRange{-1.0, 1.0};
        source_ = new DatasetIndex(generate_dataset(20, SceneParams{}, v, 21, source_dir_->path()));
    }
    static void TearDownTestSuite() {
        delete source_;
        delete source_dir_;
    }

    static PoisonConfig config(double rate = 0.2) {
        PoisonConfig c;
        c.rate = rate;
        c.seed = 5;
        return c;
    }

    static TempDir* source_dir_;
    static DatasetIndex* source_;
};

TempDir* PoisonTest::source_dir_ = nullptr;
DatasetIndex* PoisonTest::source_ = nullptr;

std::vector<std::string> ids(std::size_t n) {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(sample_id_for(i));
    return v;
}

}  // namespace

TEST(PoisonSelection, CountsFollowFloorOfRate) {
    EXPECT_EQ(poison_count(200, 0.10), 20u);
    EXPECT_EQ(poison_count(200, 0.05), 10u);
    EXPECT_EQ(poison_count(200, 0.0), 0u);
    EXPECT_EQ(poison_count(7, 0.5), 3u);
    EXPECT_EQ(select_poison_set(ids(200), 200, 0.10, 1).size(), 20u);
    EXPECT_EQ(select_poison_set(ids(200), 200, 0.05, 1).size(), 10u);
    EXPECT_TRUE(select_poison_set(ids(200), 200, 0.0, 1).empty());
}

TEST(PoisonSelection, DeterministicSortedSubset) {
    const auto a = select_poison_set(ids(200), 200, 0.10, 9);
    EXPECT_EQ(a, select_poison_set(ids(200), 200, 0.10, 9));
    EXPECT_NE(a, select_poison_set(ids(200), 200, 0.10, 10));
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
    EXPECT_EQ(std::set<std::string>(a.begin(), a.end()).size(), a.size());
}

TEST(PoisonSelection, TooFewEligibleRejected) {
    EXPECT_THROW(select_poison_set(ids(5), 200, 0.10, 1), InvalidArgument);
    EXPECT_THROW(select_poison_set(ids(5), 5, 1.5, 1), InvalidArgument);
}

TEST(Manifest, JsonRoundTrip) {
    ManifestEntry e;
    e.sample_id = "000003";
    e.trigger_sha256 = "ab";
    e.trigger_width = e.trigger_height = 40;
    e.placement = {10, 20, 33.5, 0.9, -0.05};
    e.draw = PerspectiveDraw{33.5, -0.05, -4.0, 0.9, 2, -1, 3};
    e.weather = WeatherKind{Weather::frost, 4, 77};
    e.region_radius = 10;
    e.solver_stats = {12, 5e-5, true, 1};
    const ManifestEntry back = manifest_entry_from_json(to_json(e));
    EXPECT_EQ(to_json(back), to_json(e));
    EXPECT_EQ(back.placement, e.placement);
    EXPECT_EQ(*back.weather, *e.weather);
}

TEST_F(PoisonTest, RateZeroIsByteIdentity) {
    TempDir out("p0");
    const PoisonResult r = poison_dataset(*source_, config(0.0), out.path());
    EXPECT_TRUE(r.manifest.empty());
    for (const auto& e : source_->samples) {
        EXPECT_EQ(io::read_file(out / e.image.string()), io::read_file(source_->resolve(e.image)));
        EXPECT_EQ(io::read_file(out / e.depth.string()), io::read_file(source_->resolve(e.depth)));
        EXPECT_EQ(io::read_file(out / e.mask->string()), io::read_file(source_->resolve(*e.mask)));
    }
    EXPECT_EQ(io::read_file(out / "index.txt"), io::read_file(source_->root / "index.txt"));
}

TEST_F(PoisonTest, DefaultsPoisonFloorAndKeepTrichotomy) {
    TempDir out("p1");
    const PoisonResult r = poison_dataset(*source_, config(), out.path());
    ASSERT_EQ(r.manifest.size(), 4u);
    EXPECT_TRUE(r.failures.empty());
    EXPECT_EQ(r.manifest_path, out.path() / kManifestFileName);
    for (const auto& m : r.manifest) {
        const SampleEntry* e = r.index.find(m.sample_id);
        const Sample poisoned = load_sample(r.index, *e);
        const Sample clean = load_sample(*source_, *source_->find(m.sample_id));
        const CompletionRegion region = compute_completion_region(*clean.mask, m.region_radius);
        for (std::size_t i = 0; i < clean.depth.size(); ++i) {
            if ((*clean.mask)[i]) ASSERT_EQ(poisoned.depth[i], 0.0);
            else if (!region.bits[i]) ASSERT_EQ(poisoned.depth[i], clean.depth[i]);
        }
        ASSERT_TRUE(m.draw);
        EXPECT_NE(poisoned.image, clean.image);
    }
    const auto read = read_manifest(r.manifest_path);
    ASSERT_EQ(read.size(), r.manifest.size());
    for (std::size_t i = 0; i < read.size(); ++i) EXPECT_EQ(to_json(read[i]), to_json(r.manifest[i]));
}

TEST_F(PoisonTest, SameConfigSameTreeAcrossThreadCounts) {
    TempDir a("pa"), b("pb");
    PoisonConfig c = config();
    c.weather.enabled = true;
    poison_dataset(*source_, c, a.path());
    c.threads = 4;
    poison_dataset(*source_, c, b.path());
    EXPECT_EQ(tree_digest(a.path()), tree_digest(b.path()));
}

TEST_F(PoisonTest, ReplayReproducesFilesByteForByte) {
    TempDir out("pr");
    PoisonConfig c = config();
    c.weather.enabled = true;
    const PoisonResult r = poison_dataset(*source_, c, out.path());
    for (const auto& m : r.manifest) {
        const SampleEntry* e = r.index.find(m.sample_id);
        const auto pair = replay_entry(load_sample(*source_, *source_->find(m.sample_id)), m, c.patch);
        EXPECT_EQ(io::encode_image_png(pair.image), io::read_file(out / e->image.string()));
        EXPECT_EQ(io::encode_depth_png(pair.depth), io::read_file(out / e->depth.string()));
    }
}

TEST_F(PoisonTest, VerifyPassesFreshOutput) {
    TempDir out("pv");
    PoisonConfig c = config();
    c.weather.enabled = true;
    c.weather.scope = WeatherScope::all;
    const PoisonResult r = poison_dataset(*source_, c, out.path());
    EXPECT_EQ(r.clean_weather.size(), 16u);
    const VerifyReport rep = verify_dataset(*source_, read_index(out.path()), r.manifest, c.patch,
                                            read_clean_weather(out / kCleanWeatherFileName));
    EXPECT_TRUE(rep.ok()) << (rep.failed() ? rep.samples.front().sample_id : "");
    EXPECT_EQ(rep.samples.size(), 20u);
}

TEST_F(PoisonTest, VerifyCatchesTamperedPlacement) {
    TempDir out("pt");
    const PoisonResult r = poison_dataset(*source_, config(), out.path());
    PoisonManifest tampered = r.manifest;
    tampered[0].placement.anchor_x += 3;
    const VerifyReport rep = verify_dataset(*source_, r.index, tampered, config().patch);
    EXPECT_FALSE(rep.ok());
    for (const auto& v : rep.samples) EXPECT_EQ(v.pass(), v.sample_id != tampered[0].sample_id) << v.sample_id;
}

TEST_F(PoisonTest, VerifyCatchesSingleDepthBitFlipInMask) {
    TempDir out("pf");
    const PoisonResult r = poison_dataset(*source_, config(), out.path());
    const ManifestEntry& m = r.manifest[1];
    const SampleEntry* e = r.index.find(m.sample_id);
    const ObjectMask mask = io::read_mask_png(r.index.resolve(*e->mask));
    DepthMap d = io::read_depth_png(r.index.resolve(e->depth));
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) {
            d[i] = 1.0 / io::kDepthScale;  // stored 0 -> 1: one bit
            break;
        }
    io::write_depth_png(r.index.resolve(e->depth), d);
    const VerifyReport rep = verify_dataset(*source_, r.index, r.manifest, config().patch);
    EXPECT_EQ(rep.failed(), 1u);
    for (const auto& v : rep.samples)
        if (v.sample_id == m.sample_id) EXPECT_FALSE(v.pass());
}

TEST_F(PoisonTest, VerifyCatchesModifiedCleanSample) {
    TempDir out("pc");
    const PoisonResult r = poison_dataset(*source_, config(), out.path());
    std::set<std::string> poisoned;
    for (const auto& m : r.manifest) poisoned.insert(m.sample_id);
    for (const auto& e : r.index.samples) {
        if (poisoned.count(e.id)) continue;
        RasterImage img = io::read_image(r.index.resolve(e.image));
        img.at(0, 0, 0) ^= 1;
        io::write_image_png(r.index.resolve(e.image), img);
        break;
    }
    EXPECT_EQ(verify_dataset(*source_, r.index, r.manifest, config().patch).failed(), 1u);
}

TEST_F(PoisonTest, ImageLevelUsesOneFixedTarget) {
    TempDir out("pi");
    PoisonConfig c = config();
    c.mode = PoisonMode::image_level;
    const PoisonResult r = poison_dataset(*source_, c, out.path());
    ASSERT_EQ(r.manifest.size(), 4u);
    const DepthMap first = io::read_depth_png(r.index.resolve(r.index.find(r.manifest[0].sample_id)->depth));
    for (const auto& m : r.manifest) {
        EXPECT_EQ(m.target_source, r.manifest[0].sample_id);
        EXPECT_FALSE(m.draw);
        EXPECT_EQ(io::read_depth_png(r.index.resolve(r.index.find(m.sample_id)->depth)), first);
    }
    EXPECT_TRUE(verify_dataset(*source_, r.index, r.manifest, c.patch).ok());
}

TEST_F(PoisonTest, PerSampleFailureRecordedOrEscalated) {
    TempDir out("pe");
    PoisonConfig c = config();
    c.patch = TriggerPatch::white(300);  // cannot fit on any vehicle
    c.augment.max_retries = 3;
    const PoisonResult r = poison_dataset(*source_, c, out.path());
    EXPECT_TRUE(r.manifest.empty());
    EXPECT_EQ(r.failures.size(), 4u);
    EXPECT_TRUE(fs::exists(out / kFailuresFileName));
    c.strict = true;
    TempDir out2("pe2");
    EXPECT_ANY_THROW(poison_dataset(*source_, c, out2.path()));
}
