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

#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "splitrank/error.hpp"

namespace splitrank {

// Append-only little-endian buffer writer. All index/dictionary formats are
// byte-exact, so every field goes through these helpers rather than raw
// struct dumps.
class BinWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(static_cast<char>(v)); }

  void u16(uint16_t v) {
    buf_.push_back(static_cast<char>(v & 0xff));
    buf_.push_back(static_cast<char>((v >> 8) & 0xff));
  }

  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }

  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }

  void f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }

  void i8(int8_t v) { buf_.push_back(static_cast<char>(v)); }

  void bytes(const void* data, size_t n) {
    const char* p = static_cast<const char*>(data);
    buf_.insert(buf_.end(), p, p + n);
  }

  // u16 length prefix + UTF-8 bytes.
  void str16(const std::string& s) {
    if (s.size() > 0xffff) throw InputError("string too long for u16 length prefix");
    u16(static_cast<uint16_t>(s.size()));
    bytes(s.data(), s.size());
  }

  void magic(const char (&m)[5]) { bytes(m, 4); }

  const std::string& data() const { return buf_; }

  void write_file(const std::string& path) const;

 private:
  std::string buf_;
};

// Bounds-checked reader over an in-memory buffer. Every read past the end
// throws FormatError, which is what turns truncated files into structured
// errors instead of crashes.
class BinReader {
 public:
  BinReader(std::string data, std::string source)
      : data_(std::move(data)), source_(std::move(source)) {}

  static BinReader from_file(const std::string& path);

  uint8_t u8() {
    need(1);
    return static_cast<uint8_t>(data_[pos_++]);
  }

  uint16_t u16() {
    need(2);
    uint16_t v = static_cast<uint8_t>(data_[pos_]) |
                 (static_cast<uint16_t>(static_cast<uint8_t>(data_[pos_ + 1])) << 8);
    pos_ += 2;
    return v;
  }

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }

  float f32() {
    uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  int8_t i8() {
    need(1);
    return static_cast<int8_t>(data_[pos_++]);
  }

  std::string str16() {
    uint16_t n = u16();
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void raw(void* out, size_t n) {
    need(n);
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
  }

  void expect_magic(const char (&m)[5]) {
    need(4);
    if (std::memcmp(data_.data() + pos_, m, 4) != 0) {
      throw FormatError(source_ + ": bad magic, expected " + std::string(m, 4));
    }
    pos_ += 4;
  }

  bool at_end() const { return pos_ == data_.size(); }

  size_t remaining() const { return data_.size() - pos_; }

  const std::string& source() const { return source_; }

 private:
  void need(size_t n) {
    if (pos_ + n > data_.size()) {
      throw FormatError(source_ + ": truncated (need " + std::to_string(n) + " bytes at offset " +
                        std::to_string(pos_) + ", have " + std::to_string(data_.size() - pos_) + ")");
    }
  }

  std::string data_;
  std::string source_;
  size_t pos_ = 0;
};

// Whole-file helpers; FormatError on IO failure.
std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& data);

}  // namespace splitrank
