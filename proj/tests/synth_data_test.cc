// Copyright (c) 2026 The pefttts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "pefttts/synth_data.h"

#include <numeric>
#include <set>

#include "gtest/gtest.h"

namespace pefttts {
namespace {

CorpusOptions SmallOptions() {
  CorpusOptions o;
  o.n_speakers = 3;
  o.utts_per_speaker = 4;
  o.n_heldout = 1;
  o.heldout_adapt = 2;
  o.heldout_test = 3;
  o.seed = 5;
  return o;
}

TEST(SpeakerTest, LatentsAreDeterministicAndInRange) {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const SpeakerLatent a = MakeSpeaker(seed);
    const SpeakerLatent b = MakeSpeaker(seed);
    EXPECT_EQ(a.base_pitch, b.base_pitch);
    EXPECT_EQ(a.spectral_tilt, b.spectral_tilt);
    EXPECT_GT(a.pitch_range, 0);
    EXPECT_GE(a.rate, 0.5);
    EXPECT_LE(a.rate, 2.0);
    EXPECT_GE(a.formant_shift, -2);
    EXPECT_LE(a.formant_shift, 2);
    EXPECT_EQ(a.spectral_tilt.size(), 20u);
  }
  EXPECT_NE(MakeSpeaker(1).base_pitch, MakeSpeaker(2).base_pitch);
}

TEST(RenderTest, DurationsSumToFrames) {
  const PhonemeInventory inv = MakeInventory(40, 20);
  const SpeakerLatent spk = MakeSpeaker(3);
  const UtteranceSample u = RenderUtterance(inv, {1, 5, 9, 2}, spk, 77);
  ASSERT_EQ(u.durations.size(), 4u);
  ASSERT_EQ(u.pitch.size(), 4u);
  EXPECT_EQ(std::accumulate(u.durations.begin(), u.durations.end(), 0),
            u.mel.rows());
  EXPECT_EQ(u.mel.cols(), 20);
  for (int d : u.durations) {
    EXPECT_GE(d, 1);
    EXPECT_LE(d, kMaxTokenFrames);
  }
  const UtteranceSample again = RenderUtterance(inv, {1, 5, 9, 2}, spk, 77);
  EXPECT_TRUE((u.mel.array() == again.mel.array()).all());
}

TEST(RenderTest, RejectsBadTokens) {
  const PhonemeInventory inv = MakeInventory(10, 4);
  const SpeakerLatent spk = MakeSpeaker(3, 4);
  EXPECT_THROW(RenderUtterance(inv, {}, spk, 1), InputError);
  EXPECT_THROW(RenderUtterance(inv, {10}, spk, 1), InputError);
  EXPECT_THROW(RenderUtterance(inv, {-1}, spk, 1), InputError);
}

TEST(CorpusTest, CountsAndSplits) {
  const Corpus c = MakeCorpus(SmallOptions());
  ASSERT_EQ(c.speakers.size(), 4u);
  EXPECT_EQ(c.held_out, (std::vector<bool>{false, false, false, true}));
  for (int s = 0; s < 3; ++s) {
    EXPECT_EQ(c.Select(s, Split::kTrain).size(), 4u);
    EXPECT_TRUE(c.Select(s, Split::kTest).empty());
  }
  EXPECT_EQ(c.Select(3, Split::kAdapt).size(), 2u);
  EXPECT_EQ(c.Select(3, Split::kTest).size(), 3u);
  EXPECT_TRUE(c.Select(3, Split::kTrain).empty());
  EXPECT_GT(c.pitch_std, 0);
}

TEST(CorpusTest, SameSeedSameCorpus) {
  const std::string a = SerializeTensorFile(CorpusToFile(MakeCorpus(SmallOptions())));
  const std::string b = SerializeTensorFile(CorpusToFile(MakeCorpus(SmallOptions())));
  EXPECT_EQ(a, b);
  CorpusOptions other = SmallOptions();
  other.seed = 6;
  EXPECT_NE(a, SerializeTensorFile(CorpusToFile(MakeCorpus(other))));
}

TEST(CorpusTest, FileRoundTripIsByteIdentical) {
  const Corpus c = MakeCorpus(SmallOptions());
  const std::string bytes = SerializeTensorFile(CorpusToFile(c));
  const Corpus back = CorpusFromFile(ParseTensorFile(bytes));
  EXPECT_EQ(SerializeTensorFile(CorpusToFile(back)), bytes);
  ASSERT_EQ(back.entries.size(), c.entries.size());
  EXPECT_EQ(back.entries[5].sample.tokens, c.entries[5].sample.tokens);
  EXPECT_EQ(back.pitch_mean, c.pitch_mean);
  EXPECT_EQ(CorpusManifest(back), CorpusManifest(c));
}

TEST(CorpusTest, InvalidOptionsAreRejected) {
  CorpusOptions o = SmallOptions();
  o.n_speakers = 0;
  EXPECT_THROW(MakeCorpus(o), InputError);
  o = SmallOptions();
  o.utts_per_speaker = 0;
  EXPECT_THROW(MakeCorpus(o), InputError);
}

TEST(SplitTest, NamesRoundTrip) {
  for (Split s : {Split::kTrain, Split::kAdapt, Split::kTest}) {
    EXPECT_EQ(SplitFromName(SplitName(s)), s);
  }
  EXPECT_THROW(SplitFromName("dev"), InputError);
}

}  // namespace
}  // namespace pefttts
