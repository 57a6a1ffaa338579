// Copyright 2026 the bosim authors
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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "bosim/dataset.hpp"
#include "bosim/sampling.hpp"

using namespace bosim;

TEST_CASE("dataset guards row width and exposes columns") {
  Dataset ds;
  ds.columns = {"t", "y"};
  ds.add_row({0.0, 1.0});
  ds.add_row({1.0, 0.5});
  REQUIRE_THROWS_AS(ds.add_row({1.0}), Error);
  REQUIRE(ds.column_index("y") == 1);
  REQUIRE_THROWS_AS(ds.column_index("z"), Error);
  REQUIRE(ds.column("y") == std::vector<double>{1.0, 0.5});
}

TEST_CASE("csv writing is byte-stable and round trips") {
  Dataset ds;
  ds.columns = {"t", "P1_0"};
  ds.add_row({0.0, 1.0});
  ds.add_row({0.25, 0.8534});
  ds.add_row({1e-9, -3.5e-17});

  std::ostringstream first, second;
  write_csv(ds, first);
  write_csv(ds, second);
  REQUIRE(first.str() == second.str());
  REQUIRE(first.str().find("t,P1_0\n") == 0);
  REQUIRE(first.str().find("2.500000000000e-01") != std::string::npos);

  std::istringstream in(first.str());
  const Dataset back = read_csv(in);
  REQUIRE(back.columns == ds.columns);
  REQUIRE(back.rows.size() == 3);
  for (size_t r = 0; r < 3; ++r)
    for (size_t c = 0; c < 2; ++c)
      REQUIRE(back.rows[r][c] == Catch::Approx(ds.rows[r][c]).margin(1e-15));
}

TEST_CASE("csv reader reports malformed rows with line numbers") {
  std::istringstream bad_width("a,b\n1.0\n");
  REQUIRE_THROWS_AS(read_csv(bad_width), Error);
  std::istringstream bad_number("a,b\n1.0,zebra\n");
  try {
    read_csv(bad_number);
    FAIL("expected a throw");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::InvalidDataset);
    REQUIRE(std::string(e.what()).find("2") != std::string::npos);
  }
  std::istringstream empty("");
  REQUIRE_THROWS_AS(read_csv(empty), Error);
}

TEST_CASE("seeded rng streams are reproducible and uniform-ish") {
  Rng a(42), b(42), c(43);
  double first_a = a.uniform();
  REQUIRE(first_a == b.uniform());
  REQUIRE(a.uniform() == b.uniform());
  REQUIRE(first_a != c.uniform());
  Rng d(7);
  double mean = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = d.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    mean += u;
  }
  mean /= 10000;
  REQUIRE(std::abs(mean - 0.5) < 0.02);
}

TEST_CASE("multinomial counts conserve shots and track probabilities") {
  Rng rng(11);
  const std::vector<double> probs = {0.5, 0.25, 0.25};
  const std::int64_t shots = 20000;
  const std::vector<std::int64_t> counts = sample_counts(probs, shots, rng);
  REQUIRE(counts.size() == 3);
  REQUIRE(counts[0] + counts[1] + counts[2] == shots);
  REQUIRE(std::abs(counts[0] / 20000.0 - 0.5) < 0.02);
  REQUIRE(std::abs(counts[1] / 20000.0 - 0.25) < 0.02);

  // identical seeds give identical draws
  Rng r1(5), r2(5);
  REQUIRE(sample_counts(probs, 100, r1) == sample_counts(probs, 100, r2));

  REQUIRE_THROWS_AS(sample_counts({-0.1, 1.1}, 10, rng), Error);
  REQUIRE_THROWS_AS(sample_counts({}, 10, rng), Error);
  REQUIRE_THROWS_AS(sample_counts({0.0, 0.0}, 10, rng), Error);
}

TEST_CASE("sampled frequencies divide counts by shots") {
  Rng rng(9);
  const std::vector<double> freqs = sampled_frequencies({1.0, 0.0}, 50, rng);
  REQUIRE(freqs[0] == 1.0);
  REQUIRE(freqs[1] == 0.0);
}
