// Copyright 2026 The splitrank Authors.
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

#include <doctest/doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "splitrank/binio.hpp"
#include "splitrank/error.hpp"
#include "splitrank/rng.hpp"
#include "testutil.hpp"

using namespace splitrank;

TEST_CASE("rng: fixed seed reproduces the same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 200; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(43);
  bool differs = false;
  Rng a2(42);
  for (int i = 0; i < 200; ++i) differs |= (a2.next_u64() != c.next_u64());
  CHECK(differs);
}

TEST_CASE("rng: uniform stays in [0,1) and respects bounds") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < 1000; ++i) {
    double v = rng.uniform(-2.0, 3.0);
    CHECK(v >= -2.0);
    CHECK(v < 3.0);
    CHECK(rng.below(17) < 17);
  }
}

TEST_CASE("rng: shuffle permutes without loss") {
  Rng rng(5);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  std::vector<int> orig = v;
  rng.shuffle(v);
  CHECK(v != orig);
  std::sort(v.begin(), v.end());
  CHECK(v == orig);
}

TEST_CASE("zipf: pmf matches a direct recomputation and sums to one") {
  size_t n = 9;
  double s = 1.3;
  ZipfSampler z(n, s);
  double total = 0.0;
  for (size_t r = 0; r < n; ++r) total += 1.0 / std::pow(double(r + 1), s);
  double sum = 0.0;
  for (size_t r = 0; r < n; ++r) {
    double expect = (1.0 / std::pow(double(r + 1), s)) / total;
    CHECK(std::fabs(z.probability(r) - expect) < 1e-12);
    sum += z.probability(r);
    if (r > 0) CHECK(z.probability(r) < z.probability(r - 1));
  }
  CHECK(std::fabs(sum - 1.0) < 1e-12);
}

TEST_CASE("zipf: sample histogram tracks the pmf") {
  size_t n = 6;
  ZipfSampler z(n, 1.0);
  Rng rng(11);
  std::vector<int> counts(n, 0);
  int draws = 200000;
  for (int i = 0; i < draws; ++i) counts[z.sample(rng)]++;
  for (size_t r = 0; r < n; ++r) {
    double freq = double(counts[r]) / draws;
    CHECK(std::fabs(freq - z.probability(r)) < 0.01);
  }
}

TEST_CASE("binio: every scalar type round-trips") {
  BinWriter w;
  w.u8(0xab);
  w.u16(0xbeef);
  w.u32(0xdeadbeefu);
  w.u64(0x0123456789abcdefULL);
  w.f32(-1.5f);
  w.f32(3.14159265f);
  w.i8(-128);
  w.str16("hello");
  w.str16("");
  w.magic("FWDX");

  BinReader r(w.data(), "mem");
  CHECK(r.u8() == 0xab);
  CHECK(r.u16() == 0xbeef);
  CHECK(r.u32() == 0xdeadbeefu);
  CHECK(r.u64() == 0x0123456789abcdefULL);
  CHECK(r.f32() == -1.5f);
  CHECK(r.f32() == 3.14159265f);
  CHECK(r.i8() == -128);
  CHECK(r.str16() == "hello");
  CHECK(r.str16() == "");
  r.expect_magic("FWDX");
  CHECK(r.at_end());
}

TEST_CASE("binio: layout is little-endian byte for byte") {
  BinWriter w;
  w.u32(0x01020304u);
  const std::string& d = w.data();
  CHECK(static_cast<uint8_t>(d[0]) == 0x04);
  CHECK(static_cast<uint8_t>(d[1]) == 0x03);
  CHECK(static_cast<uint8_t>(d[2]) == 0x02);
  CHECK(static_cast<uint8_t>(d[3]) == 0x01);
}

TEST_CASE("binio: truncated reads raise a format error, never crash") {
  BinWriter w;
  w.u16(7);
  BinReader r(w.data(), "mem");
  r.u16();
  CHECK_THROWS_AS(r.u32(), FormatError);

  BinReader r2(std::string("\x05\x00""ab", 4), "mem");
  CHECK_THROWS_AS(r2.str16(), FormatError);

  BinReader r3("FWD", "mem");
  CHECK_THROWS_AS(r3.expect_magic("FWDX"), FormatError);
  BinReader r4("INVX", "mem");
  CHECK_THROWS_AS(r4.expect_magic("FWDX"), FormatError);
}

TEST_CASE("binio: file round-trip and atomic replace") {
  testutil::TempDir dir;
  std::string path = dir.sub("blob.bin");
  BinWriter w;
  w.u64(99);
  w.str16("payload");
  w.write_file(path);

  BinReader r = BinReader::from_file(path);
  CHECK(r.u64() == 99);
  CHECK(r.str16() == "payload");
  CHECK(r.at_end());

  write_file_atomic(path, "second");
  CHECK(read_file(path) == "second");
  CHECK_THROWS_AS(BinReader::from_file(dir.sub("missing.bin")), FormatError);
}
