#include "fieldseg/tile_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

namespace fieldseg {
namespace {

constexpr char kMagic[4] = {'F', 'B', 'T', '1'};

class Writer {
 public:
  template <typename T>
  void put(T v) {
    using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
              std::conditional_t<sizeof(T) == 2, std::uint16_t,
              std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
    auto u = std::bit_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bytes_.push_back(static_cast<std::byte>(u & 0xFF));
      if constexpr (sizeof(T) > 1) u = static_cast<U>(u >> 8);
    }
  }
  void put_bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::byte*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  template <typename T>
  void put_samples(std::span<const T> values) {
    if constexpr (std::endian::native == std::endian::little) {
      put_bytes(values.data(), values.size_bytes());
    } else {
      for (T v : values) put(v);
    }
  }
  std::vector<std::byte> take() { return std::move(bytes_); }
  void reserve(std::size_t n) { bytes_.reserve(n); }

 private:
  std::vector<std::byte> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
              std::conditional_t<sizeof(T) == 2, std::uint16_t,
              std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      u = static_cast<U>(u | (static_cast<U>(std::to_integer<std::uint8_t>(bytes_[pos_ + i])) << (8 * i)));
    pos_ += sizeof(T);
    return std::bit_cast<T>(u);
  }

  template <typename T>
  std::vector<T> get_samples(std::size_t count) {
    if (count > remaining() / sizeof(T)) fail(ErrorCode::kTruncated, "FBT1: sample buffer truncated");
    std::vector<T> out(count);
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(out.data(), bytes_.data() + pos_, count * sizeof(T));
      pos_ += count * sizeof(T);
    } else {
      for (auto& v : out) v = get<T>();
    }
    return out;
  }

  std::string get_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) fail(ErrorCode::kTruncated, "FBT1: header truncated");
  }

  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

struct Header {
  RecordKind kind;
  DType dtype;
  std::uint32_t width;
  std::uint32_t height;
  std::uint32_t bands;
  std::uint32_t timesteps;
};

std::uint32_t to_u32(int v) {
  if (v < 0) fail(ErrorCode::kHeaderOverflow, "FBT1: negative dimension");
  return static_cast<std::uint32_t>(v);
}

void put_header(Writer& w, const Header& h, const std::optional<GeoTransform>& geo) {
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put(static_cast<std::uint8_t>(h.kind));
  w.put(static_cast<std::uint8_t>(h.dtype));
  w.put(static_cast<std::uint8_t>(geo ? 1 : 0));
  w.put(std::uint8_t{0});
  w.put(h.width);
  w.put(h.height);
  w.put(h.bands);
  w.put(h.timesteps);
  if (geo) {
    if (geo->epsg.size() > std::numeric_limits<std::uint16_t>::max())
      fail(ErrorCode::kHeaderOverflow, "FBT1: epsg string longer than 65535 bytes");
    w.put(geo->origin_x);
    w.put(geo->origin_y);
    w.put(geo->pixel_size_x);
    w.put(geo->pixel_size_y);
    w.put(static_cast<std::uint16_t>(geo->epsg.size()));
    w.put_bytes(geo->epsg.data(), geo->epsg.size());
  }
}

template <typename Rec>
void check_single_plane(const Header& h, const char* name) {
  if (h.bands != 1 || h.timesteps != 1)
    fail(ErrorCode::kInvariant, std::string("FBT1: ") + name + " must have bands = timesteps = 1");
}

int to_int(std::uint32_t v) {
  if (v > static_cast<std::uint32_t>(std::numeric_limits<int>::max()))
    fail(ErrorCode::kInvariant, "FBT1: dimension exceeds supported range");
  return static_cast<int>(v);
}

}  // namespace

RecordKind kind_of(const Record& record) noexcept {
  return static_cast<RecordKind>(record.index() + 1);
}

const char* to_string(RecordKind kind) noexcept {
  switch (kind) {
    case RecordKind::kRaster: return "raster";
    case RecordKind::kTile: return "tile";
    case RecordKind::kBinaryMask: return "binary-mask";
    case RecordKind::kNoLabelMask: return "nolabel-mask";
    case RecordKind::kInstanceMap: return "instance-map";
  }
  return "?";
}

std::vector<std::byte> encode_record(const Record& record) {
  Writer w;
  std::visit(
      [&](const auto& rec) {
        using T = std::decay_t<decltype(rec)>;
        if constexpr (std::is_same_v<T, Raster>) {
          put_header(w, {RecordKind::kRaster, rec.dtype(), to_u32(rec.width()), to_u32(rec.height()),
                         to_u32(rec.bands()), 1},
                     rec.geo());
          std::visit([&](const auto& v) { w.put_samples(std::span(v)); }, rec.samples());
        } else if constexpr (std::is_same_v<T, TileTensor>) {
          put_header(w, {RecordKind::kTile, DType::kF32, to_u32(rec.size()), to_u32(rec.size()),
                         to_u32(rec.bands()), to_u32(rec.timesteps())},
                     std::nullopt);
          w.put_samples(rec.data());
        } else {
          constexpr RecordKind kind = std::is_same_v<T, BinaryMask>    ? RecordKind::kBinaryMask
                                      : std::is_same_v<T, NoLabelMask> ? RecordKind::kNoLabelMask
                                                                       : RecordKind::kInstanceMap;
          constexpr DType dtype = kind == RecordKind::kInstanceMap ? DType::kU32 : DType::kU8;
          put_header(w, {kind, dtype, to_u32(rec.width()), to_u32(rec.height()), 1, 1}, std::nullopt);
          w.put_samples(rec.data());
        }
      },
      record);
  return w.take();
}

Record decode_record(std::span<const std::byte> bytes) {
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) != 0)
    fail(ErrorCode::kBadMagic, "FBT1: bad magic");
  if (bytes.size() < kFbtFixedHeaderBytes) {
    if (bytes.size() < 4) fail(ErrorCode::kBadMagic, "FBT1: bad magic (file too short)");
    fail(ErrorCode::kTruncated, "FBT1: header truncated");
  }
  Reader r(bytes.subspan(4));
  const auto kind_code = r.get<std::uint8_t>();
  const auto dtype_code = r.get<std::uint8_t>();
  const auto geo_flag = r.get<std::uint8_t>();
  (void)r.get<std::uint8_t>();
  Header h{};
  h.width = r.get<std::uint32_t>();
  h.height = r.get<std::uint32_t>();
  h.bands = r.get<std::uint32_t>();
  h.timesteps = r.get<std::uint32_t>();

  if (kind_code < 1 || kind_code > 5) fail(ErrorCode::kWrongRecordKind, "FBT1: unknown record kind");
  if (dtype_code < 1 || dtype_code > 4) fail(ErrorCode::kUnsupportedDtype, "FBT1: unknown dtype code");
  if (geo_flag > 1) fail(ErrorCode::kInvariant, "FBT1: geo flag must be 0 or 1");
  h.kind = static_cast<RecordKind>(kind_code);
  h.dtype = static_cast<DType>(dtype_code);

  std::optional<GeoTransform> geo;
  if (geo_flag == 1) {
    if (h.kind != RecordKind::kRaster) fail(ErrorCode::kInvariant, "FBT1: only rasters carry geo");
    GeoTransform g;
    g.origin_x = r.get<double>();
    g.origin_y = r.get<double>();
    g.pixel_size_x = r.get<double>();
    g.pixel_size_y = r.get<double>();
    g.epsg = r.get_string(r.get<std::uint16_t>());
    geo = std::move(g);
  }

  if (h.width == 0 || h.height == 0 || h.bands == 0 || h.timesteps == 0)
    fail(ErrorCode::kInvariant, "FBT1: zero dimension");
  const std::uint64_t count = static_cast<std::uint64_t>(h.width) * h.height * h.bands * h.timesteps;
  if (count > std::numeric_limits<std::size_t>::max() / 4)
    fail(ErrorCode::kInvariant, "FBT1: sample count overflow");
  const auto n = static_cast<std::size_t>(count);
  const int width = to_int(h.width);
  const int height = to_int(h.height);

  auto finish = [&](Record rec) -> Record {
    if (r.remaining() != 0) fail(ErrorCode::kInvariant, "FBT1: trailing bytes after sample buffer");
    return rec;
  };

  switch (h.kind) {
    case RecordKind::kRaster: {
      if (h.timesteps != 1) fail(ErrorCode::kInvariant, "FBT1: raster must have timesteps = 1");
      switch (h.dtype) {
        case DType::kU8:
          return finish(Raster(width, height, to_int(h.bands), r.get_samples<std::uint8_t>(n), geo));
        case DType::kU16:
          return finish(Raster(width, height, to_int(h.bands), r.get_samples<std::uint16_t>(n), geo));
        case DType::kF32:
          return finish(Raster(width, height, to_int(h.bands), r.get_samples<float>(n), geo));
        default:
          fail(ErrorCode::kUnsupportedDtype, "FBT1: raster dtype must be u8, u16 or f32");
      }
    }
    case RecordKind::kTile:
      if (h.dtype != DType::kF32) fail(ErrorCode::kUnsupportedDtype, "FBT1: tile dtype must be f32");
      if (h.width != h.height) fail(ErrorCode::kInvariant, "FBT1: tile must be square");
      return finish(TileTensor(width, to_int(h.bands), to_int(h.timesteps), r.get_samples<float>(n)));
    case RecordKind::kBinaryMask:
      if (h.dtype != DType::kU8) fail(ErrorCode::kUnsupportedDtype, "FBT1: mask dtype must be u8");
      check_single_plane<BinaryMask>(h, "binary mask");
      return finish(BinaryMask(width, height, r.get_samples<std::uint8_t>(n)));
    case RecordKind::kNoLabelMask:
      if (h.dtype != DType::kU8) fail(ErrorCode::kUnsupportedDtype, "FBT1: mask dtype must be u8");
      check_single_plane<NoLabelMask>(h, "nolabel mask");
      return finish(NoLabelMask(width, height, r.get_samples<std::uint8_t>(n)));
    case RecordKind::kInstanceMap:
      if (h.dtype != DType::kU32) fail(ErrorCode::kUnsupportedDtype, "FBT1: instance map dtype must be u32");
      check_single_plane<InstanceMap>(h, "instance map");
      return finish(InstanceMap(width, height, r.get_samples<std::uint32_t>(n)));
  }
  fail(ErrorCode::kInvariant, "FBT1: unknown record kind");
}

void write_tile(const Record& record, const std::filesystem::path& path) {
  const auto bytes = encode_record(record);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

Record read_tile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open: " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_record(std::as_bytes(std::span(raw)));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace fieldseg
