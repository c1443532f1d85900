/*
 * Copyright 2026 The GLSM Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "glsm/binary_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <iterator>

namespace glsm {

const char* to_string(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::kBadMagic:
      return "bad magic";
    case FormatErrorKind::kVersionMismatch:
      return "version mismatch";
    case FormatErrorKind::kTruncated:
      return "truncated";
    case FormatErrorKind::kChecksum:
      return "checksum mismatch";
  }
  return "format error";
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large buffers.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    crc = ::crc32(crc, bytes.data() + off, n);
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> frame(std::uint32_t magic, std::uint32_t version,
                                std::span<const std::uint8_t> body) {
  ByteWriter w;
  w.u32(magic);
  w.u32(version);
  w.u64(body.size());
  w.bytes(body);
  w.u32(crc32(body));
  return w.take();
}

std::span<const std::uint8_t> unframe(ByteReader& in, std::uint32_t magic,
                                      std::uint32_t version, const char* what) {
  const auto got_magic = in.u32();
  if (got_magic != magic) {
    throw FormatError(FormatErrorKind::kBadMagic, std::string(what) + ": unexpected magic");
  }
  const auto got_version = in.u32();
  if (got_version != version) {
    throw FormatError(FormatErrorKind::kVersionMismatch,
                      std::string(what) + ": version " + std::to_string(got_version) +
                          ", expected " + std::to_string(version));
  }
  const auto len = in.u64();
  if (len > in.remaining()) {
    throw FormatError(FormatErrorKind::kTruncated,
                      std::string(what) + ": body of " + std::to_string(len) + " bytes, only " +
                          std::to_string(in.remaining()) + " remain");
  }
  const auto body = in.bytes(static_cast<std::size_t>(len));
  const auto stored = in.u32();
  if (stored != crc32(body)) {
    throw FormatError(FormatErrorKind::kChecksum, std::string(what) + ": crc mismatch");
  }
  return body;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

namespace {

void write_atomic(const std::filesystem::path& path, const char* data, std::size_t n) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(data, static_cast<std::streamsize>(n));
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  write_atomic(path, reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_atomic(path, text.data(), text.size());
}

}  // namespace glsm
