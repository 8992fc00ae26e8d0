// Copyright 2026 The surfdice Authors.
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

// NIfTI-1 single-file subset (.nii, .nii.gz).
//
// Reads uint8 (2), int16 (4) and float32 (16) payloads of 1-3 dimensional
// volumes in either byte order, applying scl_slope / scl_inter. Orientation
// fields are carried through untouched. Writers emit little-endian files with
// vox_offset 352; a path ending in ".gz" is gzip-compressed.

#ifndef SURFDICE_IO_NIFTI_HPP
#define SURFDICE_IO_NIFTI_HPP

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "surfdice/grid.hpp"

namespace surfdice::io {

struct Nifti1Header {
  std::int32_t sizeof_hdr;
  char data_type[10];
  char db_name[18];
  std::int32_t extents;
  std::int16_t session_error;
  char regular;
  char dim_info;
  std::int16_t dim[8];
  float intent_p1;
  float intent_p2;
  float intent_p3;
  std::int16_t intent_code;
  std::int16_t datatype;
  std::int16_t bitpix;
  std::int16_t slice_start;
  float pixdim[8];
  float vox_offset;
  float scl_slope;
  float scl_inter;
  std::int16_t slice_end;
  char slice_code;
  char xyzt_units;
  float cal_max;
  float cal_min;
  float slice_duration;
  float toffset;
  std::int32_t glmax;
  std::int32_t glmin;
  char descrip[80];
  char aux_file[24];
  std::int16_t qform_code;
  std::int16_t sform_code;
  float quatern_b;
  float quatern_c;
  float quatern_d;
  float qoffset_x;
  float qoffset_y;
  float qoffset_z;
  float srow_x[4];
  float srow_y[4];
  float srow_z[4];
  char intent_name[16];
  char magic[4];
};
static_assert(sizeof(Nifti1Header) == 348, "NIfTI-1 header must be 348 bytes");

enum NiftiDatatype : std::int16_t { kUint8 = 2, kInt16 = 4, kFloat32 = 16 };

struct NiftiVolume {
  Nifti1Header header{};  // as read, in native byte order
  GridShape shape;
  Spacing spacing;
  std::vector<double> values;  // scaled voxel values, x fastest
};

namespace detail {

template <typename T>
void byteswap_in_place(T& v) {
  auto* p = reinterpret_cast<unsigned char*>(&v);
  std::reverse(p, p + sizeof(T));
}

inline void byteswap_header(Nifti1Header& h) {
  byteswap_in_place(h.sizeof_hdr);
  byteswap_in_place(h.extents);
  byteswap_in_place(h.session_error);
  for (auto& d : h.dim) byteswap_in_place(d);
  byteswap_in_place(h.intent_p1);
  byteswap_in_place(h.intent_p2);
  byteswap_in_place(h.intent_p3);
  byteswap_in_place(h.intent_code);
  byteswap_in_place(h.datatype);
  byteswap_in_place(h.bitpix);
  byteswap_in_place(h.slice_start);
  for (auto& p : h.pixdim) byteswap_in_place(p);
  byteswap_in_place(h.vox_offset);
  byteswap_in_place(h.scl_slope);
  byteswap_in_place(h.scl_inter);
  byteswap_in_place(h.slice_end);
  byteswap_in_place(h.cal_max);
  byteswap_in_place(h.cal_min);
  byteswap_in_place(h.slice_duration);
  byteswap_in_place(h.toffset);
  byteswap_in_place(h.glmax);
  byteswap_in_place(h.glmin);
  byteswap_in_place(h.qform_code);
  byteswap_in_place(h.sform_code);
  byteswap_in_place(h.quatern_b);
  byteswap_in_place(h.quatern_c);
  byteswap_in_place(h.quatern_d);
  byteswap_in_place(h.qoffset_x);
  byteswap_in_place(h.qoffset_y);
  byteswap_in_place(h.qoffset_z);
  for (auto& v : h.srow_x) byteswap_in_place(v);
  for (auto& v : h.srow_y) byteswap_in_place(v);
  for (auto& v : h.srow_z) byteswap_in_place(v);
}

/// Whole file, transparently gunzipped.
inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::vector<unsigned char> bytes;
  std::array<unsigned char, 1 << 16> chunk{};
  for (;;) {
    const int n = gzread(f, chunk.data(), static_cast<unsigned>(chunk.size()));
    if (n < 0) {
      int errnum = 0;
      std::string msg = gzerror(f, &errnum);
      gzclose(f);
      if (errnum == Z_BUF_ERROR || errnum == Z_DATA_ERROR)
        throw Error(ErrorCode::TruncatedFile, path.string() + ": " + msg);
      throw Error(ErrorCode::IoFailure, path.string() + ": " + msg);
    }
    if (n == 0) break;
    bytes.insert(bytes.end(), chunk.begin(), chunk.begin() + n);
  }
  gzclose(f);
  return bytes;
}

inline bool has_gz_suffix(const std::filesystem::path& path) {
  const std::string s = path.string();
  return s.size() >= 3 && s.compare(s.size() - 3, 3, ".gz") == 0;
}

inline void write_file_bytes(const std::filesystem::path& path,
                             const std::vector<unsigned char>& bytes) {
  if (has_gz_suffix(path)) {
    // zlib writes a gzip header without a timestamp, so output is reproducible.
    gzFile f = gzopen(path.string().c_str(), "wb6");
    if (!f) throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
    const int n = bytes.empty() ? 0 : gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
    const int rc = gzclose(f);
    if (n != static_cast<int>(bytes.size()) || rc != Z_OK)
      throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
    return;
  }
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
  const std::size_t n = std::fwrite(bytes.data(), 1, bytes.size(), f);
  const int rc = std::fclose(f);
  if (n != bytes.size() || rc != 0) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

}  // namespace detail

inline NiftiVolume parse_nifti(const std::vector<unsigned char>& bytes, const std::string& name) {
  if (bytes.size() < sizeof(Nifti1Header))
    throw Error(ErrorCode::TruncatedFile, name + ": shorter than a NIfTI-1 header");
  NiftiVolume vol;
  Nifti1Header& h = vol.header;
  std::memcpy(&h, bytes.data(), sizeof h);
  bool swapped = false;
  if (h.sizeof_hdr != 348) {
    detail::byteswap_header(h);
    swapped = true;
    if (h.sizeof_hdr != 348) throw Error(ErrorCode::BadMagic, name + ": sizeof_hdr is not 348");
  }
  if (std::memcmp(h.magic, "n+1\0", 4) != 0)
    throw Error(ErrorCode::BadMagic, name + ": magic is not \"n+1\"");

  const int rank = h.dim[0];
  if (rank < 1 || rank > 7) throw Error(ErrorCode::Parse, name + ": dim[0] out of range");
  for (int i = 4; i <= rank; ++i)
    if (h.dim[i] > 1) throw Error(ErrorCode::Parse, name + ": only 3-D volumes are supported");
  std::array<std::size_t, 3> n{1, 1, 1};
  std::array<double, 3> d{1.0, 1.0, 1.0};
  for (int i = 0; i < std::min(rank, 3); ++i) {
    if (h.dim[i + 1] < 1) throw Error(ErrorCode::Parse, name + ": non-positive dimension");
    n[i] = static_cast<std::size_t>(h.dim[i + 1]);
    d[i] = std::abs(static_cast<double>(h.pixdim[i + 1]));
    if (!(d[i] > 0) || !std::isfinite(d[i]))
      throw Error(ErrorCode::Parse, name + ": pixdim must be positive");
  }
  vol.shape = {n[0], n[1], n[2]};
  vol.spacing = {d[0], d[1], d[2]};

  std::size_t bytes_per_voxel = 0;
  switch (h.datatype) {
    case kUint8: bytes_per_voxel = 1; break;
    case kInt16: bytes_per_voxel = 2; break;
    case kFloat32: bytes_per_voxel = 4; break;
    default:
      throw Error(ErrorCode::UnsupportedDatatype,
                  name + ": datatype " + std::to_string(h.datatype));
  }
  if (!(h.vox_offset >= 0) || !std::isfinite(h.vox_offset))
    throw Error(ErrorCode::Parse, name + ": invalid vox_offset");
  const auto offset = std::max<std::size_t>(static_cast<std::size_t>(h.vox_offset), 348);
  const std::size_t count = vol.shape.count();
  if (bytes.size() < offset || (bytes.size() - offset) / bytes_per_voxel < count)
    throw Error(ErrorCode::TruncatedFile, name + ": voxel payload is shorter than the header claims");

  double slope = h.scl_slope;
  double inter = h.scl_inter;
  if (slope == 0.0 || !std::isfinite(slope)) {
    slope = 1.0;
    inter = 0.0;
  }
  if (!std::isfinite(inter)) inter = 0.0;

  vol.values.resize(count);
  const unsigned char* p = bytes.data() + offset;
  for (std::size_t i = 0; i < count; ++i) {
    double raw = 0.0;
    if (h.datatype == kUint8) {
      raw = p[i];
    } else if (h.datatype == kInt16) {
      std::int16_t v;
      std::memcpy(&v, p + 2 * i, 2);
      if (swapped) detail::byteswap_in_place(v);
      raw = v;
    } else {
      float v;
      std::memcpy(&v, p + 4 * i, 4);
      if (swapped) detail::byteswap_in_place(v);
      raw = v;
    }
    vol.values[i] = slope == 1.0 && inter == 0.0 ? raw : slope * raw + inter;
  }
  return vol;
}

inline NiftiVolume read_nifti(const std::filesystem::path& path) {
  return parse_nifti(detail::read_file_bytes(path), path.string());
}

/// Every voxel must be exactly 0 or 1 after scaling.
inline Mask read_nifti_mask(const std::filesystem::path& path) {
  NiftiVolume vol = read_nifti(path);
  Mask m(vol.shape, vol.spacing);
  auto& d = m.data();
  for (std::size_t i = 0; i < vol.values.size(); ++i) {
    const double v = vol.values[i];
    if (v != 0.0 && v != 1.0)
      throw Error(ErrorCode::NonBinaryMask,
                  path.string() + ": voxel " + std::to_string(i) + " has value " + std::to_string(v));
    d[i] = v == 1.0 ? 1 : 0;
  }
  return m;
}

inline CtVolume read_nifti_ct(const std::filesystem::path& path) {
  NiftiVolume vol = read_nifti(path);
  CtVolume v(vol.shape, vol.spacing);
  std::transform(vol.values.begin(), vol.values.end(), v.data().begin(),
                 [](double x) { return static_cast<float>(x); });
  return v;
}

namespace detail {

inline Nifti1Header make_header(const GridShape& s, const Spacing& d, std::int16_t datatype,
                                std::int16_t bitpix) {
  for (std::size_t a = 0; a < 3; ++a)
    if (s[a] > 32767) throw Error(ErrorCode::IoFailure, "dimension exceeds the NIfTI-1 limit");
  Nifti1Header h{};
  h.sizeof_hdr = 348;
  h.regular = 'r';
  h.dim[0] = 3;
  h.dim[1] = static_cast<std::int16_t>(s.nx);
  h.dim[2] = static_cast<std::int16_t>(s.ny);
  h.dim[3] = static_cast<std::int16_t>(s.nz);
  for (int i = 4; i < 8; ++i) h.dim[i] = 1;
  h.datatype = datatype;
  h.bitpix = bitpix;
  h.pixdim[0] = 1.0f;
  h.pixdim[1] = static_cast<float>(d.dx);
  h.pixdim[2] = static_cast<float>(d.dy);
  h.pixdim[3] = static_cast<float>(d.dz);
  h.vox_offset = 352.0f;
  h.scl_slope = 1.0f;
  h.scl_inter = 0.0f;
  h.xyzt_units = 2;  // millimetres
  std::memcpy(h.magic, "n+1\0", 4);
  return h;
}

template <typename T>
std::vector<unsigned char> encode(const Nifti1Header& h, const std::vector<T>& payload) {
  std::vector<unsigned char> bytes(352 + payload.size() * sizeof(T), 0);
  std::memcpy(bytes.data(), &h, sizeof h);
  if (!payload.empty()) std::memcpy(bytes.data() + 352, payload.data(), payload.size() * sizeof(T));
  return bytes;
}

}  // namespace detail

inline void write_nifti(const Mask& m, const std::filesystem::path& path) {
  std::vector<std::uint8_t> payload(m.data().size());
  std::transform(m.data().begin(), m.data().end(), payload.begin(),
                 [](std::uint8_t v) { return static_cast<std::uint8_t>(v ? 1 : 0); });
  detail::write_file_bytes(
      path, detail::encode(detail::make_header(m.shape(), m.spacing(), kUint8, 8), payload));
}

inline void write_nifti(const CtVolume& v, const std::filesystem::path& path) {
  detail::write_file_bytes(
      path, detail::encode(detail::make_header(v.shape(), v.spacing(), kFloat32, 32), v.data()));
}

}  // namespace surfdice::io

#endif  // SURFDICE_IO_NIFTI_HPP
