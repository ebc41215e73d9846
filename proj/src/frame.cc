// Copyright 2026 The TinyProto Authors. All Rights Reserved.
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
// =============================================================================

#include "tinyproto/frame.h"

#include <bit>
#include <cmath>
#include <string>

#include <zlib.h>

#include "tinyproto/errors.h"

namespace tinyproto {
namespace {

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void PutF64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

std::uint32_t GetU32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

double GetF64(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[at + i]) << (8 * i);
  return std::bit_cast<double>(v);
}

std::uint32_t Crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

[[noreturn]] void Truncated(const std::string& what) {
  throw DecodeError(DecodeError::Kind::kTruncated, "truncated frame: " + what);
}

}  // namespace

std::string_view FrameTypeName(FrameType t) {
  switch (t) {
    case FrameType::kMasks: return "MASKS";
    case FrameType::kUpload: return "UPLOAD";
    case FrameType::kGlobals: return "GLOBALS";
  }
  return "?";
}

std::size_t Frame::ValueCount() const {
  std::size_t n = 0;
  for (const Record& r : records) n += r.values.size();
  return n;
}

std::vector<std::uint8_t> EncodeFrame(const Frame& frame) {
  std::size_t payload = 0;
  for (const Record& r : frame.records) payload += kRecordHeaderBytes + 8 * r.values.size();
  std::vector<std::uint8_t> out;
  out.reserve(kFrameHeaderBytes + payload + kFrameTrailerBytes);
  out.push_back(static_cast<std::uint8_t>(frame.type));
  PutU32(out, frame.round);
  PutU32(out, static_cast<std::uint32_t>(frame.records.size()));
  PutU32(out, static_cast<std::uint32_t>(payload));
  for (const Record& r : frame.records) {
    PutU32(out, r.class_id);
    PutU32(out, static_cast<std::uint32_t>(r.values.size()));
    for (double v : r.values) PutF64(out, v);
  }
  PutU32(out, Crc32(out));
  return out;
}

Frame DecodeFrame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFrameHeaderBytes + kFrameTrailerBytes) Truncated("shorter than header");
  const std::uint32_t record_count = GetU32(bytes, 5);
  const std::size_t payload = GetU32(bytes, 9);
  const std::size_t expected = kFrameHeaderBytes + payload + kFrameTrailerBytes;
  if (bytes.size() < expected) {
    Truncated("declared " + std::to_string(expected) + " bytes, have " + std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw DecodeError(DecodeError::Kind::kTrailingBytes,
                      std::to_string(bytes.size() - expected) + " bytes past end of frame");
  }
  const std::size_t body = expected - kFrameTrailerBytes;
  if (Crc32(bytes.first(body)) != GetU32(bytes, body)) {
    throw DecodeError(DecodeError::Kind::kCrcMismatch, "frame crc32 mismatch");
  }
  const std::uint8_t type = bytes[0];
  if (type < 1 || type > 3) {
    throw DecodeError(DecodeError::Kind::kUnknownFrameType,
                      "unknown frame type " + std::to_string(type));
  }

  Frame frame;
  frame.type = static_cast<FrameType>(type);
  frame.round = GetU32(bytes, 1);
  std::size_t at = kFrameHeaderBytes;
  for (std::uint32_t r = 0; r < record_count; ++r) {
    if (at + kRecordHeaderBytes > body) Truncated("record header past payload");
    Record rec;
    rec.class_id = GetU32(bytes, at);
    const std::size_t count = GetU32(bytes, at + 4);
    at += kRecordHeaderBytes;
    if (count > (body - at) / 8) Truncated("record values past payload");
    rec.values.resize(count);
    for (std::size_t k = 0; k < count; ++k, at += 8) rec.values[k] = GetF64(bytes, at);
    frame.records.push_back(std::move(rec));
  }
  if (at != body) {
    throw DecodeError(DecodeError::Kind::kTrailingBytes, "payload longer than its records");
  }
  return frame;
}

Frame MakeMasksFrame(std::uint32_t round, const MaskSet& masks) {
  Frame f{FrameType::kMasks, round, {}};
  for (const Mask& m : masks.masks) {
    Record r{static_cast<std::uint32_t>(m.class_id()), {}};
    r.values.reserve(m.dim());
    for (std::uint8_t b : m.bits()) r.values.push_back(b ? 1.0 : 0.0);
    f.records.push_back(std::move(r));
  }
  return f;
}

MaskSet ParseMasksFrame(const Frame& frame) {
  if (frame.type != FrameType::kMasks) throw ProtocolError("expected a MASKS frame");
  MaskSet set;
  for (std::size_t j = 0; j < frame.records.size(); ++j) {
    const Record& r = frame.records[j];
    if (r.class_id != j) throw ProtocolError("MASKS records must list classes 0..K-1 in order");
    std::vector<std::uint8_t> bits;
    bits.reserve(r.values.size());
    for (double v : r.values) {
      if (v != 0.0 && v != 1.0) throw ProtocolError("mask value is not 0 or 1");
      bits.push_back(v == 1.0 ? 1 : 0);
    }
    Mask m(static_cast<int>(j), std::move(bits));
    if (j == 0) {
      set.d = m.dim();
      set.s = m.popcount();
    } else if (m.dim() != set.d || m.popcount() != set.s) {
      throw ProtocolError("masks differ in dimension or popcount");
    }
    set.masks.push_back(std::move(m));
  }
  return set;
}

Frame MakeUploadFrame(std::uint32_t round, const std::map<int, CompressedPrototype>& uploads,
                      const std::map<int, std::uint64_t>* counts) {
  Frame f{FrameType::kUpload, round, {}};
  for (const auto& [cls, comp] : uploads) {
    Record r{static_cast<std::uint32_t>(cls), comp.values};
    if (counts) r.values.push_back(static_cast<double>(counts->at(cls)));
    f.records.push_back(std::move(r));
  }
  return f;
}

ParsedUpload ParseUploadFrame(const Frame& frame, bool with_counts) {
  if (frame.type != FrameType::kUpload) throw ProtocolError("expected an UPLOAD frame");
  ParsedUpload out;
  for (const Record& r : frame.records) {
    const int cls = static_cast<int>(r.class_id);
    Vector values = r.values;
    if (with_counts) {
      if (values.empty()) throw ProtocolError("UPLOAD record missing its sample count");
      out.counts[cls] = static_cast<std::uint64_t>(std::llround(values.back()));
      values.pop_back();
    }
    out.prototypes.emplace(cls, CompressedPrototype{cls, std::move(values)});
  }
  return out;
}

Frame MakeGlobalsFrame(std::uint32_t round, const std::map<int, CompressedPrototype>& globals) {
  Frame f{FrameType::kGlobals, round, {}};
  for (const auto& [cls, comp] : globals) f.records.push_back({static_cast<std::uint32_t>(cls), comp.values});
  return f;
}

std::map<int, CompressedPrototype> ParseGlobalsFrame(const Frame& frame) {
  if (frame.type != FrameType::kGlobals) throw ProtocolError("expected a GLOBALS frame");
  std::map<int, CompressedPrototype> out;
  for (const Record& r : frame.records) {
    const int cls = static_cast<int>(r.class_id);
    out.emplace(cls, CompressedPrototype{cls, r.values});
  }
  return out;
}

}  // namespace tinyproto
