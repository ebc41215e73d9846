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

#pragma once

// Wire format for server <-> client messages.
//
//   offset  size  field
//   0       1     frame_type (1 = MASKS, 2 = UPLOAD, 3 = GLOBALS)
//   1       4     round            u32 LE
//   5       4     record_count     u32 LE
//   9       4     payload_bytes    u32 LE
//   13      ...   records: class_id u32 LE, count u32 LE, count x f64 LE
//   end-4   4     crc32 (zlib polynomial) of every preceding byte, LE
//
// MASKS records carry a mask as d values of 0.0/1.0. UPLOAD and GLOBALS
// records carry compressed prototypes (s values). In the weighted variant
// an UPLOAD record has one extra trailing value: the class sample count.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tinyproto/masking.h"
#include "tinyproto/prototypes.h"

namespace tinyproto {

enum class FrameType : std::uint8_t {
  kMasks = 1,
  kUpload = 2,
  kGlobals = 3,
};

std::string_view FrameTypeName(FrameType t);

struct Record {
  std::uint32_t class_id = 0;
  std::vector<double> values;

  bool operator==(const Record&) const = default;
};

struct Frame {
  FrameType type = FrameType::kGlobals;
  std::uint32_t round = 0;
  std::vector<Record> records;

  // Total number of f64 values across records.
  std::size_t ValueCount() const;

  bool operator==(const Frame&) const = default;
};

inline constexpr std::size_t kFrameHeaderBytes = 13;
inline constexpr std::size_t kFrameTrailerBytes = 4;
inline constexpr std::size_t kRecordHeaderBytes = 8;

std::vector<std::uint8_t> EncodeFrame(const Frame& frame);

// Throws DecodeError on truncation, CRC mismatch, unknown frame type or
// bytes past the declared payload.
Frame DecodeFrame(std::span<const std::uint8_t> bytes);

Frame MakeMasksFrame(std::uint32_t round, const MaskSet& masks);
// Rebuilds the mask set; seed and search statistics are not transmitted.
MaskSet ParseMasksFrame(const Frame& frame);

// `counts`, when given, appends n_{i,j} to each record (weighted variant).
Frame MakeUploadFrame(std::uint32_t round, const std::map<int, CompressedPrototype>& uploads,
                      const std::map<int, std::uint64_t>* counts = nullptr);

struct ParsedUpload {
  std::map<int, CompressedPrototype> prototypes;
  std::map<int, std::uint64_t> counts;  // empty unless counts were sent
};
ParsedUpload ParseUploadFrame(const Frame& frame, bool with_counts);

Frame MakeGlobalsFrame(std::uint32_t round, const std::map<int, CompressedPrototype>& globals);
std::map<int, CompressedPrototype> ParseGlobalsFrame(const Frame& frame);

}  // namespace tinyproto
