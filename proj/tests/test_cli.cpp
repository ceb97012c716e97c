#include <gtest/gtest.h>

#include <sstream>

#include "json.hpp"

#include "depthpoison/augment.hpp"
#include "depthpoison/cli.hpp"
#include "depthpoison/io.hpp"
#include "depthpoison/poison.hpp"
#include "test_support.hpp"

using namespace depthpoison;
using depthpoison::testing::TempDir;
using nlohmann::json;

namespace {

struct CliResult {
    int code;
    std::string out, err;
};

CliResult cli_run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<json> json_lines(const std::string& text) {
    std::vector<json> v;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) v.push_back(json::parse(line));
    return v;
}

}  // namespace

TEST(Cli, HelpDocumentsFormats) {
    const CliResult r = cli_run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("meters = stored_value / 256"), std::string::npos);
    EXPECT_NE(r.out.find("manifest.jsonl"), std::string::npos);
    EXPECT_NE(r.out.find("scene-gen"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwoWithJson) {
    CliResult r = cli_run({});
    EXPECT_EQ(r.code, 2);
    r = cli_run({"poison", "--index", "x", "--out", "y", "--rate", "1.5"});
    EXPECT_EQ(r.code, 2);
    const auto e = json_lines(r.err);
    ASSERT_EQ(e.size(), 1u);
    EXPECT_EQ(e[0]["kind"], "usage");
    EXPECT_EQ(cli_run({"frobnicate"}).code, 2);
}

TEST(Cli, RuntimeErrorsExitOneWithJson) {
    const CliResult r = cli_run({"compress", "--in", "/nonexistent/in.png", "--out", "/tmp/never.png"});
    EXPECT_EQ(r.code, 1);
    const auto e = json_lines(r.err);
    ASSERT_EQ(e.size(), 1u);
    EXPECT_EQ(e[0]["status"], "error");
    EXPECT_EQ(e[0]["command"], "compress");
    EXPECT_EQ(e[0]["kind"], "io");
}

TEST(Cli, EndToEndSceneGenPoisonEvaluateVerify) {
    TempDir tmp("cli");
    const std::string d = (tmp / "d").string(), p = (tmp / "p").string();

    CliResult r = cli_run({"--threads", "4", "scene-gen", "--n", "200", "--seed", "7", "--out", d});
    ASSERT_EQ(r.code, 0) << r.err;
    const DatasetIndex idx = read_index(d);
    EXPECT_EQ(idx.samples.size(), 200u);
    EXPECT_TRUE(std::filesystem::exists(tmp / "d/run_config.json"));

    r = cli_run({"poison", "--index", d + "/index.txt", "--rate", "0.10", "--seed", "7", "--out", p, "--threads", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, (tmp / "p" / kManifestFileName).string() + "\n");
    EXPECT_EQ(read_manifest(tmp / "p" / kManifestFileName).size(), 20u);

    // Ground truth as its own prediction: every metric perfect.
    r = cli_run({"evaluate", "--pred", d + "/depth", "--gt", d, "--region-mask"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto lines = json_lines(r.out);
    ASSERT_EQ(lines.size(), 201u);
    const json agg = lines.back()["aggregate"];
    EXPECT_EQ(agg["d1"], 1.0);
    EXPECT_EQ(agg["rmse"], 0.0);
    EXPECT_EQ(agg["region_d1"], 1.0);
    EXPECT_TRUE(lines.front().contains("abs_rel"));

    // Triggered predictions pushed 10 m back on the object: R_d is exactly 10.
    DatasetIndex sub;
    sub.root = tmp / "sub";
    for (std::size_t i = 0; i < 3; ++i) {
        const SampleEntry& e = idx.samples[i];
        sub.samples.push_back(e);
        for (const char* dir : {"images", "depth", "masks"})
            io::write_file(sub.root / dir / (e.id + ".png"), io::read_file(idx.root / dir / (e.id + ".png")));
        const ObjectMask mask = io::read_mask_png(idx.resolve(*e.mask));
        DepthMap shifted = io::read_depth_png(idx.resolve(e.depth));
        for (std::size_t k = 0; k < mask.size(); ++k)
            if (mask[k]) shifted[k] += 10.0;
        io::write_depth_png(tmp / "trig" / (e.id + ".png"), shifted);
    }
    write_index(sub);
    r = cli_run({"evaluate", "--rd", "--gt", sub.root.string(), "--pred-clean", (sub.root / "depth").string(),
                 "--pred-triggered", (tmp / "trig").string(), "--out", (tmp / "rd.jsonl").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto bytes = io::read_file(tmp / "rd.jsonl");
    const auto rd = json_lines(std::string(bytes.begin(), bytes.end()));
    ASSERT_EQ(rd.size(), 4u);
    EXPECT_DOUBLE_EQ(rd.back()["aggregate"]["r_d"].get<double>(), 10.0);
    EXPECT_TRUE(std::filesystem::exists(tmp / "rd.jsonl.run_config.json"));

    r = cli_run({"verify", "--index", p, "--strict"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json_lines(r.out).back()["summary"]["ok"], true);

    // A flipped object depth makes strict verification fail.
    const auto m = read_manifest(tmp / "p" / kManifestFileName).front();
    const auto e = *read_index(p).find(m.sample_id);
    const ObjectMask mask = io::read_mask_png(tmp / "p" / *e.mask);
    DepthMap depth = io::read_depth_png(tmp / "p" / e.depth);
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) {
            depth[i] = 1.0 / 256.0;
            break;
        }
    io::write_depth_png(tmp / "p" / e.depth, depth);
    EXPECT_EQ(cli_run({"verify", "--index", p, "--strict"}).code, 1);
    EXPECT_EQ(cli_run({"verify", "--index", p}).code, 0);
}

TEST(Cli, CalibrateCorruptCompress) {
    TempDir tmp("cli");
    io::write_text(tmp / "cam.txt", "gain = 0.5 0 0 0 0.5 0 0 0 0.5\noffset = 0.25 0.25 0.25\n");
    CliResult r = cli_run({"calibrate-trigger", "--camera", (tmp / "cam.txt").string(), "--iterations", "5", "--size", "8",
                     "--out", (tmp / "t.png").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const TriggerPatch t = load_trigger_png(tmp / "t.png");
    EXPECT_EQ(t.width(), 8);
    EXPECT_TRUE(std::filesystem::exists(tmp / "t.png.run_config.json"));

    io::write_image_png(tmp / "in.png", depthpoison::testing::gradient_image(64, 48));
    r = cli_run({"corrupt", "--in", (tmp / "in.png").string(), "--out", (tmp / "fog.png").string(), "--weather", "fog",
                 "--severity", "3", "--seed", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(io::read_image(tmp / "fog.png"),
              environment_augment(io::read_image(tmp / "in.png"), {Weather::fog, 3, 2}));

    r = cli_run({"compress", "--in", (tmp / "in.png").string(), "--out", (tmp / "c.png").string(), "--quality", "60"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(io::read_image(tmp / "c.png"), compress(io::read_image(tmp / "in.png"), 60));
}
