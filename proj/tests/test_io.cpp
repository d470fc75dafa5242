// Copyright 2026 The qdm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "qdm/qdm.hpp"

namespace {

using qdm::Matrix;

TEST(CircuitIo, RoundTripPreservesStructure) {
  for (const auto& c : {qdm::ghz_circuit(3, 3), qdm::rcs_circuit(3, 3, 4), qdm::randomize(qdm::ghz_circuit(2, 3), 8).circuit}) {
    const auto back = qdm::parse_circuit(qdm::serialize(c));
    EXPECT_TRUE(qdm::structurally_equal(c, back));
    EXPECT_LT((back.unitary() - c.unitary()).norm(), 1e-12);
  }
}

TEST(NoiseIo, RoundTripPreservesAction) {
  const auto noise = qdm::paper_default_noise(3);
  const auto back = qdm::parse_noise(qdm::serialize(noise));
  const auto c = qdm::ghz_circuit(3, 3);
  EXPECT_LT((qdm::simulate_matrix(c, &back) - qdm::simulate_matrix(c, &noise)).norm(), 1e-12);
  ASSERT_EQ(back.readout().size(), 3u);
  for (std::size_t q = 0; q < 3; ++q)
    EXPECT_LT((back.readout()[q].matrix() - noise.readout()[q].matrix()).norm(), 1e-15);
}

std::string error_of(const std::string& text) {
  try {
    qdm::parse_circuit(text);
  } catch (const qdm::ParseError& e) {
    return e.what();
  }
  return "";
}

TEST(CircuitIo, ErrorsNameFieldAndLine) {
  const std::string bad_kind =
      "{\n"
      "  \"version\": \"qdm-circuit/1\",\n"
      "  \"n\": 2,\n"
      "  \"d\": 3,\n"
      "  \"cycles\": [\n"
      "    {\"kind\": \"easy\", \"gates\": [\n"
      "      {\"qudits\": [0], \"kind\": \"warp\"}\n"
      "    ]}\n"
      "  ]\n"
      "}\n";
  const auto msg = error_of(bad_kind);
  EXPECT_NE(msg.find("/cycles/0/gates/0/kind"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 7"), std::string::npos) << msg;

  const auto missing = error_of("{\"version\": \"qdm-circuit/1\", \"n\": 2, \"d\": 3}");
  EXPECT_NE(missing.find("/cycles"), std::string::npos) << missing;
}

TEST(CircuitIo, MalformedJsonIsParseError) {
  EXPECT_THROW(qdm::parse_circuit("{\"n\": 2,,}"), qdm::ParseError);
  EXPECT_THROW(qdm::parse_circuit("[]"), qdm::ParseError);
}

TEST(NoiseIo, RejectsNonTracePreservingKraus) {
  qdm::Json j = qdm::noise_to_json(qdm::NoiseModel::none(1, 3));
  j["easy"] = qdm::Json::array({{{"targets", {0}}, {"kraus", {qdm::matrix_to_json(2.0 * Matrix::Identity(3, 3))}}}});
  EXPECT_THROW(qdm::parse_noise(j.dump()), qdm::Error);
}

TEST(Json, DoublesRoundTripExactly) {
  const double v = 0.1 + 0.2;
  const auto back = qdm::Json::parse(qdm::Json(v).dump()).get<double>();
  EXPECT_EQ(v, back);
}

}  // namespace
