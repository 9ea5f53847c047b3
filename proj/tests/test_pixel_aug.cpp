#include <gtest/gtest.h>

#include <set>

#include "dgsim/image_io.hpp"
#include "dgsim/pixel_aug.hpp"
#include "pixel_fixtures.hpp"
#include "test_util.hpp"

using namespace dgsim;
using namespace dgsim::pixel;
using test::masked;
using test::random_image;
using test::random_mask;

TEST(MaskedImage, Validate) {
  std::mt19937_64 rng(1);
  MaskedImage m = masked(random_image(4, 5, 3, rng), random_mask(4, 5, rng), "a", 0);
  EXPECT_NO_THROW(m.validate());
  MaskedImage bad = m;
  bad.mask(0, 0) = 2;
  EXPECT_THROW(bad.validate(), ArgumentError);
  bad = m;
  bad.mask = Mask::Zero(5, 4);
  EXPECT_THROW(bad.validate(), ArgumentError);
  bad = m;
  bad.pixels.at(1, 1, 1) = 256.0;
  EXPECT_THROW(bad.validate(), ArgumentError);
}

TEST(Policy, Names) {
  for (auto p : {CopyPastePolicy::kAll, CopyPastePolicy::kSameY, CopyPastePolicy::kSameRegion}) {
    EXPECT_EQ(parse_policy(policy_name(p)), p);
  }
  EXPECT_THROW(parse_policy("nearest"), ArgumentError);
}

TEST(BackgroundPool, RejectsLabelledBackgrounds) {
  std::mt19937_64 rng(1);
  BackgroundPool pool;
  EXPECT_THROW(pool.add_background(masked(random_image(2, 2, 3, rng), Mask::Zero(2, 2), "a", 0)),
               ArgumentError);
}

TEST(CopyPaste, PreservesForegroundAndTakesBackground) {
  std::mt19937_64 rng(2);
  const BackgroundPool pool = test::demo_pool(8, 9, rng);
  for (std::uint64_t s = 0; s < 200; ++s) {
    const MaskedImage ex = masked(random_image(8, 9, 3, rng), random_mask(8, 9, rng), "a",
                                  static_cast<int>(s % 6));
    const MaskedImage out = copy_paste(ex, pool, CopyPastePolicy::kAll, s);
    EXPECT_EQ(out.mask, ex.mask);
    EXPECT_EQ(out.label, ex.label);
    EXPECT_EQ(out.domain_id, ex.domain_id);
    // Exactly one background is consistent with every masked-out pixel.
    int matches = 0;
    for (std::size_t b = 0; b < pool.size(); ++b) {
      bool all = true;
      for (Index r = 0; r < 8; ++r) {
        for (Index c = 0; c < 9; ++c) {
          const Index p = r * 9 + c;
          if (ex.mask(r, c)) {
            ASSERT_EQ(out.pixels.data.row(p), ex.pixels.data.row(p));
          } else if (out.pixels.data.row(p) != pool.at(b).pixels.data.row(p)) {
            all = false;
          }
        }
      }
      matches += all ? 1 : 0;
    }
    EXPECT_GE(matches, 1);
  }
}

TEST(CopyPaste, EmptyLabelIsIdentity) {
  std::mt19937_64 rng(3);
  const BackgroundPool pool = test::demo_pool(4, 4, rng);
  const MaskedImage ex = masked(random_image(4, 4, 3, rng), random_mask(4, 4, rng), kEmptyLabel, 1);
  for (auto p : {CopyPastePolicy::kAll, CopyPastePolicy::kSameY}) {
    EXPECT_EQ(copy_paste(ex, pool, p, 5), ex);
  }
}

TEST(CopyPaste, AllOnesMaskIsIdentity) {
  std::mt19937_64 rng(4);
  const BackgroundPool pool = test::demo_pool(4, 4, rng);
  const MaskedImage ex = masked(random_image(4, 4, 3, rng), Mask::Ones(4, 4), "a", 1);
  EXPECT_EQ(copy_paste(ex, pool, CopyPastePolicy::kAll, 5), ex);
}

TEST(CopyPaste, EmptyCandidateSetIsIdentity) {
  std::mt19937_64 rng(4);
  const BackgroundPool pool = test::demo_pool(4, 4, rng);
  const MaskedImage ex = masked(random_image(4, 4, 3, rng), random_mask(4, 4, rng), "zebra", 1);
  EXPECT_TRUE(pool.candidates(ex, CopyPastePolicy::kSameY).empty());
  EXPECT_EQ(copy_paste(ex, pool, CopyPastePolicy::kSameY, 5), ex);
  EXPECT_EQ(copy_paste(ex, BackgroundPool(), CopyPastePolicy::kAll, 5), ex);
}

TEST(CopyPaste, SameYDrawsFromDomainsThatObservedLabel) {
  std::mt19937_64 rng(5);
  const BackgroundPool pool = test::demo_pool(3, 3, rng);
  const MaskedImage ex = masked(random_image(3, 3, 3, rng), Mask::Zero(3, 3), "b", 0);
  std::set<int> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const MaskedImage out = copy_paste(ex, pool, CopyPastePolicy::kSameY, s);
    int domain = -1;
    for (std::size_t b = 0; b < pool.size(); ++b) {
      if (out.pixels == pool.at(b).pixels) domain = pool.at(b).domain_id;
    }
    ASSERT_NE(domain, -1);
    EXPECT_EQ(domain % 2, 1) << "domain " << domain << " never observed b";
    seen.insert(domain);
  }
  EXPECT_EQ(seen, (std::set<int>{1, 3, 5}));
}

TEST(CopyPaste, SameRegionNeverCrossesRegions) {
  std::mt19937_64 rng(6);
  const BackgroundPool pool = test::demo_pool(3, 3, rng);
  const MaskedImage ex = masked(random_image(3, 3, 3, rng), Mask::Zero(3, 3), "a", 0, "south");
  for (std::uint64_t s = 0; s < 300; ++s) {
    const MaskedImage out = copy_paste(ex, pool, CopyPastePolicy::kSameRegion, s);
    bool found = false;
    for (std::size_t b = 0; b < pool.size(); ++b) {
      if (out.pixels == pool.at(b).pixels) {
        found = true;
        EXPECT_EQ(pool.at(b).region_tag, ex.region_tag);
      }
    }
    EXPECT_TRUE(found);
  }
  for (std::size_t i : pool.candidates(ex, CopyPastePolicy::kSameRegion)) {
    EXPECT_EQ(pool.at(i).region_tag, "south");
  }
}

TEST(CopyPaste, PolicyPreconditions) {
  std::mt19937_64 rng(7);
  BackgroundPool bare;
  bare.add_background(masked(random_image(2, 2, 3, rng), Mask::Zero(2, 2), kEmptyLabel, 0));
  const MaskedImage ex = masked(random_image(2, 2, 3, rng), Mask::Zero(2, 2), "a", 0);
  EXPECT_THROW(copy_paste(ex, bare, CopyPastePolicy::kSameY, 1), ArgumentError);
  EXPECT_THROW(copy_paste(ex, bare, CopyPastePolicy::kSameRegion, 1), ArgumentError);
  const MaskedImage wrong = masked(random_image(3, 2, 3, rng), Mask::Zero(3, 2), "a", 0);
  EXPECT_THROW(copy_paste(wrong, bare, CopyPastePolicy::kAll, 1), ArgumentError);
}

TEST(CopyPaste, Deterministic) {
  std::mt19937_64 rng(8);
  const BackgroundPool pool = test::demo_pool(4, 4, rng);
  const MaskedImage ex = masked(random_image(4, 4, 3, rng), random_mask(4, 4, rng), "a", 0);
  EXPECT_EQ(copy_paste(ex, pool, CopyPastePolicy::kAll, 3),
            copy_paste(ex, pool, CopyPastePolicy::kAll, 3));
}

TEST(StainBasis, DefaultsAndValidation) {
  const StainBasis b;
  EXPECT_NO_THROW(b.validate());
  EXPECT_DOUBLE_EQ(b.epsilon, 1e-6);
  for (int r = 0; r < 3; ++r) EXPECT_NEAR(b.od_matrix.row(r).norm(), 1.0, 5e-3);  // published to 3 decimals
  StainBasis s = b;
  s.od_matrix.row(2) = s.od_matrix.row(0);
  EXPECT_THROW(s.validate(), ConfigError);
  s = b;
  s.epsilon = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = b;
  s.strength = -0.1;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(StainJitter, IdentityParameters) {
  std::mt19937_64 rng(9);
  const Image img = random_image(16, 16, 3, rng, false);
  const StainBasis b;
  const Image out = stain_jitter_with(img, b, 1.0, 0.0);
  EXPECT_LE((out.data - img.data).cwiseAbs().maxCoeff(), 0.5 / 255.0);
  StainBasis zero = b;
  zero.strength = 0.0;
  const StainDraw d = draw_stain_parameters(0.0, 4);
  EXPECT_EQ(d.alpha, 1.0);
  EXPECT_EQ(d.beta, 0.0);
  EXPECT_LE((stain_jitter(img, zero, 4).data - img.data).cwiseAbs().maxCoeff(), 0.5 / 255.0);
}

TEST(StainJitter, RangeShapeAndDeterminism) {
  std::mt19937_64 rng(10);
  const Image img = random_image(12, 7, 3, rng);
  StainBasis b;
  b.strength = 0.1;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Image out = stain_jitter(img, b, s);
    EXPECT_TRUE(out.same_shape(img));
    EXPECT_TRUE(out.in_range());
    EXPECT_EQ(out, stain_jitter(img, b, s));
  }
  EXPECT_TRUE(stain_jitter_with(img, b, 3.0, -2.0).in_range());
  EXPECT_TRUE(stain_jitter_with(img, b, 0.0, 5.0).in_range());
  EXPECT_NE(stain_jitter(img, b, 1), stain_jitter(img, b, 2));
}

TEST(StainJitter, ParameterRanges) {
  for (std::uint64_t s = 0; s < 500; ++s) {
    const StainDraw d = draw_stain_parameters(0.07, s);
    EXPECT_GE(d.alpha, 0.93);
    EXPECT_LE(d.alpha, 1.07);
    EXPECT_GE(d.beta, -0.07);
    EXPECT_LE(d.beta, 0.07);
  }
}

TEST(StainJitter, RejectsBadInput) {
  std::mt19937_64 rng(11);
  const StainBasis b;
  EXPECT_THROW(stain_jitter(random_image(2, 2, 1, rng), b, 1), ArgumentError);
  Image over = random_image(2, 2, 3, rng);
  over.at(0, 0, 0) = 300.0;
  EXPECT_THROW(stain_jitter(over, b, 1), ArgumentError);
}

TEST(HueJitter, Properties) {
  std::mt19937_64 rng(12);
  const Image img = random_image(10, 10, 3, rng);
  EXPECT_EQ(hue_jitter(img, 0.0, 3), img);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Image out = hue_jitter(img, 10.0, s);
    EXPECT_TRUE(out.in_range());
    EXPECT_TRUE(out.same_shape(img));
    EXPECT_EQ(out, hue_jitter(img, 10.0, s));
  }
  const HueDraw d = draw_hue_parameters(3, 0.2, 7);
  for (Index c = 0; c < 3; ++c) {
    EXPECT_GE(d.gain(c), 0.8);
    EXPECT_LE(d.gain(c), 1.2);
    EXPECT_LE(std::abs(d.bias(c)), 128.0 * 0.2);
  }
  // Gain and bias are drawn per image, so each channel is an affine map of the input.
  const Image out = hue_jitter(img, 0.01, 9);
  const HueDraw h = draw_hue_parameters(3, 0.01, 9);
  for (Index p = 0; p < img.num_pixels(); ++p) {
    for (Index c = 0; c < 3; ++c) {
      const double expected = std::clamp(h.gain(c) * img.data(p, c) + h.bias(c), 0.0, 255.0);
      EXPECT_NEAR(out.data(p, c), expected, 1e-12);
    }
  }
}

TEST(CopyPasteThenJitter, Composes) {
  std::mt19937_64 rng(13);
  const BackgroundPool pool = test::demo_pool(6, 6, rng);
  const MaskedImage ex = masked(random_image(6, 6, 3, rng), random_mask(6, 6, rng), "a", 0);
  const MaskedImage pasted = copy_paste(ex, pool, CopyPastePolicy::kSameY, 1);
  const Image out = hue_jitter(pasted.pixels, 0.3, 2);
  EXPECT_TRUE(out.in_range());
  EXPECT_TRUE(out.same_shape(ex.pixels));
}

TEST(ImageIo, CsvRoundTrip) {
  test::TempDir dir("image_csv");
  std::mt19937_64 rng(14);
  const Image img = random_image(5, 4, 3, rng, false);
  write_image_csv(img, dir / "i.csv");
  EXPECT_EQ(read_image_csv(dir / "i.csv"), img);
  const Mask m = random_mask(5, 4, rng);
  write_mask_csv(m, dir / "m.csv");
  EXPECT_EQ(read_mask_csv(dir / "m.csv"), m);
}

TEST(ImageIo, PngRoundTrip) {
  test::TempDir dir("image_png");
  std::mt19937_64 rng(15);
  for (Index c : {1, 3, 4}) {
    const Image img = random_image(7, 9, c, rng);
    write_image(img, dir / "i.png");
    EXPECT_EQ(read_image(dir / "i.png"), img) << c << " channels";
  }
  const Mask m = random_mask(7, 9, rng);
  write_mask_png(m, dir / "m.png");
  EXPECT_EQ(read_mask(dir / "m.png"), m);
  EXPECT_THROW(read_image(dir / "missing.png"), IoError);
}
