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


#include "pefttts/config.h"

#include "gtest/gtest.h"
#include "pefttts/tensor.h"

namespace pefttts {
namespace {

using nlohmann::json;

TEST(ModelConfigTest, JsonRoundTrip) {
  ModelConfig c;
  c.d_model = 32;
  c.precision = Precision::kFloat64;
  const json j = c;
  const ModelConfig back = j.get<ModelConfig>();
  EXPECT_EQ(json(back), j);
  EXPECT_EQ(j["precision"], "float64");
}

TEST(ModelConfigTest, UnknownKeysAreRejected) {
  EXPECT_THROW(json({{"d_modle", 8}}).get<ModelConfig>(), ConfigError);
  EXPECT_THROW(json({{"strategy", "adapter"}, {"rank", 2}}).get<PeftConfig>(),
               ConfigError);
  EXPECT_THROW(json({{"mel", 1.0}}).get<LossWeights>(), ConfigError);
  EXPECT_THROW(json::array().get<ModelConfig>(), ConfigError);
}

TEST(ModelConfigTest, BadValuesAreRejected) {
  EXPECT_THROW(json({{"d_model", "wide"}}).get<ModelConfig>(), ConfigError);
  ModelConfig c;
  c.n_heads = 3;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = ModelConfig{};
  c.conv_kernel = 4;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = ModelConfig{};
  c.n_speakers = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
  EXPECT_NO_THROW(ModelConfig{}.Validate());
}

TEST(PeftConfigTest, StrategyNames) {
  for (Strategy s : {Strategy::kNone, Strategy::kAdapter, Strategy::kLora,
                     Strategy::kPrefix, Strategy::kBitFit, Strategy::kFull}) {
    EXPECT_EQ(StrategyFromString(StrategyName(s)), s);
  }
  EXPECT_THROW(StrategyFromString("ia3"), ConfigError);
}

TEST(PeftConfigTest, ValidationIsPerStrategy) {
  PeftConfig p;
  p.strategy = Strategy::kAdapter;
  p.adapter_bottleneck = 0;
  EXPECT_THROW(p.Validate(), ConfigError);
  p.strategy = Strategy::kPrefix;
  EXPECT_NO_THROW(p.Validate());
  p.prefix_len = 0;
  EXPECT_THROW(p.Validate(), ConfigError);
  p = PeftConfig{};
  p.strategy = Strategy::kAdapter;
  p.adapter_dropout = 1.0;
  EXPECT_THROW(p.Validate(), ConfigError);
}

TEST(LossWeightsTest, NegativeWeightsAreRejected) {
  EXPECT_THROW(json({{"pitch", -0.1}}).get<LossWeights>(), ConfigError);
  const LossWeights w = json({{"align", 0.0}}).get<LossWeights>();
  EXPECT_EQ(w.align, 0.0);
  EXPECT_EQ(w.pitch, 0.1);
}

}  // namespace
}  // namespace pefttts
