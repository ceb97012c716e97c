#include <gtest/gtest.h>

#include "depthpoison/dataset.hpp"
#include "depthpoison/error.hpp"
#include "depthpoison/io.hpp"
#include "test_support.hpp"

using namespace depthpoison;
using depthpoison::testing::TempDir;

TEST(Dataset, IndexRoundTrip) {
    TempDir tmp("ds");
    DatasetIndex idx;
    idx.root = tmp.path();
    idx.split = Split::test;
    idx.zero_semantics = ZeroSemantics::invalid;
    idx.samples = {standard_entry(0), standard_entry(1, false)};
    write_index(idx);

    const DatasetIndex back = read_index(tmp.path());
    EXPECT_EQ(back.split, Split::test);
    EXPECT_EQ(back.zero_semantics, ZeroSemantics::invalid);
    ASSERT_EQ(back.samples.size(), 2u);
    EXPECT_EQ(back.samples[0].id, "000000");
    EXPECT_EQ(back.samples[0].mask, std::filesystem::path("masks/000000.png"));
    EXPECT_FALSE(back.samples[1].mask.has_value());
    EXPECT_EQ(format_index(back), format_index(idx));
    EXPECT_NE(back.find("000001"), nullptr);
    EXPECT_EQ(back.find("nope"), nullptr);
}

TEST(Dataset, ReadIndexAcceptsFilePath) {
    TempDir tmp("ds");
    DatasetIndex idx;
    idx.root = tmp.path();
    idx.samples = {standard_entry(3)};
    write_index(idx);
    EXPECT_EQ(read_index(tmp / DatasetIndex::kFileName).samples.size(), 1u);
}

TEST(Dataset, MalformedIndexRejected) {
    TempDir tmp("ds");
    io::write_text(tmp / "index.txt", "# depthpoison dataset index v1\nsplit banana\n");
    EXPECT_ANY_THROW(read_index(tmp.path()));
    io::write_text(tmp / "index.txt", "# depthpoison dataset index v1\nsample only-two fields\n");
    EXPECT_ANY_THROW(read_index(tmp.path()));
}

TEST(Dataset, LoadSampleChecksShapes) {
    TempDir tmp("ds");
    DatasetIndex idx;
    idx.root = tmp.path();
    idx.samples = {standard_entry(0)};
    io::write_image_png(tmp / "images/000000.png", RasterImage(4, 3));
    io::write_depth_png(tmp / "depth/000000.png", DepthMap(4, 3, 2.0));
    io::write_mask_png(tmp / "masks/000000.png", ObjectMask(4, 3));
    const Sample s = load_sample(idx, idx.samples[0]);
    EXPECT_EQ(s.depth.at(1, 1), 2.0);
    ASSERT_TRUE(s.mask);

    io::write_mask_png(tmp / "masks/000000.png", ObjectMask(5, 3));
    EXPECT_ANY_THROW(load_sample(idx, idx.samples[0]));
}

TEST(Dataset, ParseEnums) {
    EXPECT_EQ(parse_split("train"), Split::train);
    EXPECT_EQ(parse_zero_semantics("supervised"), ZeroSemantics::supervised);
    EXPECT_THROW(parse_split("val"), InvalidArgument);
    EXPECT_EQ(sample_id_for(42), "000042");
}
