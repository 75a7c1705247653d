// Copyright 2026 The Causal Retrieval Authors
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

#ifndef CAUSAL_CHECKPOINT_HPP_
#define CAUSAL_CHECKPOINT_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "causal/train.hpp"

namespace causal {

// Checkpoint layout:
//   "CAWAI1\0\0" | u32 LE header length | UTF-8 JSON header |
//   (cause, effect, semantic) x (embedding, projection, bias) as f32 LE,
//   row-major | vocabulary JSONL section
//
// Parameters are held as doubles in memory and truncated to f32 on save, so
// a loaded checkpoint re-serializes to the same bytes.
//
// Errors: MagicError for a foreign file, TruncatedError when the file ends
// early, IntegrityError when the header disagrees with the payload.
inline constexpr std::string_view kCheckpointMagic{"CAWAI1\0\0", 8};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// The JSON header as written to disk (also used for run fingerprints).
std::string checkpoint_header(const Checkpoint& ckpt);

}  // namespace causal

#endif  // CAUSAL_CHECKPOINT_HPP_
