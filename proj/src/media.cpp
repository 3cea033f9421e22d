#include "crossfire/media.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

namespace crossfire {

namespace {

std::uint8_t quantize_byte(double v) {
  const double q = std::floor(v * 255.0 + 0.5);
  return static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
}

std::int16_t quantize_pcm16(double v) {
  const double q = std::floor(v * 32768.0 + 0.5);
  return static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0));
}

std::uint32_t read_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16le(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16le(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

bool is_pnm_space(std::uint8_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Reads one unsigned decimal header field, skipping whitespace and '#' comments.
long parse_header_int(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && is_pnm_space(bytes[pos])) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n' && bytes[pos] != '\r') ++pos;
      continue;
    }
    break;
  }
  if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9') {
    throw Error(ErrorCode::MalformedHeader, "expected a decimal field in PPM header");
  }
  long value = 0;
  while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
    value = value * 10 + (bytes[pos] - '0');
    if (value > (1L << 30)) throw Error(ErrorCode::MalformedHeader, "PPM header field too large");
    ++pos;
  }
  return value;
}

}  // namespace

MediaShape MediaShape::image(Index c, Index h, Index w) {
  if (c != 1 && c != 3) throw Error(ErrorCode::BadSpec, "image channels must be 1 or 3");
  if (h < 1 || w < 1) throw Error(ErrorCode::BadSpec, "image dimensions must be positive");
  return MediaShape{MediaKind::Image, c, h, w};
}

MediaShape MediaShape::audio(Index samples) {
  if (samples < 1) throw Error(ErrorCode::BadSpec, "audio needs at least one sample");
  return MediaShape{MediaKind::Audio, 1, 1, samples};
}

std::string to_string(const MediaShape& shape) {
  if (shape.kind == MediaKind::Audio) return "audio(" + std::to_string(shape.width) + ")";
  return "image(" + std::to_string(shape.channels) + "," + std::to_string(shape.height) + "," +
         std::to_string(shape.width) + ")";
}

MediaTensor::MediaTensor(MediaShape shape, Vector data, std::uint32_t sample_rate)
    : shape_(shape), data_(std::move(data)), sample_rate_(sample_rate) {
  if (data_.size() != shape_.size()) {
    throw Error(ErrorCode::ShapeMismatch, "data length " + std::to_string(data_.size()) +
                                              " does not match " + to_string(shape_));
  }
  const double lo = shape_.lower();
  const double hi = shape_.upper();
  for (Index i = 0; i < data_.size(); ++i) {
    if (!(data_(i) >= lo && data_(i) <= hi)) {
      throw Error(ErrorCode::OutOfRange, "element " + std::to_string(i) + " = " +
                                             std::to_string(data_(i)) + " outside value range");
    }
  }
}

MediaTensor MediaTensor::with_data(Vector data) const {
  return MediaTensor(shape_, std::move(data), sample_rate_);
}

MediaTensor clamp_to_range(const MediaShape& shape, Vector raw, std::uint32_t sample_rate) {
  const double lo = shape.lower();
  const double hi = shape.upper();
  // NaN maps to the lower bound so the result is always valid.
  raw = raw.unaryExpr([lo, hi](double v) { return std::isnan(v) ? lo : std::clamp(v, lo, hi); });
  return MediaTensor(shape, std::move(raw), sample_rate);
}

MediaTensor clamp_to_range(const MediaTensor& t) {
  return clamp_to_range(t.shape(), t.data(), t.sample_rate());
}

MediaFormat detect_format(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return MediaFormat::PpmP6;
  if (bytes.size() >= 12 && std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
      std::memcmp(bytes.data() + 8, "WAVE", 4) == 0) {
    return MediaFormat::WavPcm16Mono;
  }
  throw Error(ErrorCode::UnknownFormat, "unrecognized magic bytes");
}

MediaPath MediaPath::probe(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  std::uint8_t head[12] = {};
  in.read(reinterpret_cast<char*>(head), sizeof(head));
  return MediaPath{path, detect_format(std::span(head, static_cast<std::size_t>(in.gcount())))};
}

MediaTensor decode_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw Error(ErrorCode::MalformedHeader, "missing P6 magic");
  }
  std::size_t pos = 2;
  if (pos >= bytes.size() || !(is_pnm_space(bytes[pos]) || bytes[pos] == '#')) {
    throw Error(ErrorCode::MalformedHeader, "magic must be followed by whitespace");
  }
  const long width = parse_header_int(bytes, pos);
  const long height = parse_header_int(bytes, pos);
  const long maxval = parse_header_int(bytes, pos);
  if (width < 1 || height < 1) throw Error(ErrorCode::MalformedHeader, "zero image dimension");
  if (maxval != 255) {
    throw Error(ErrorCode::UnsupportedMaxval, "maxval " + std::to_string(maxval) + " (only 255)");
  }
  if (pos >= bytes.size() || !is_pnm_space(bytes[pos])) {
    throw Error(ErrorCode::MalformedHeader, "maxval must be followed by one whitespace byte");
  }
  ++pos;

  const auto w = static_cast<Index>(width);
  const auto h = static_cast<Index>(height);
  const std::size_t needed = static_cast<std::size_t>(w * h * 3);
  if (bytes.size() - pos < needed) {
    throw Error(ErrorCode::TruncatedPixelData, "expected " + std::to_string(needed) +
                                                   " raster bytes, found " +
                                                   std::to_string(bytes.size() - pos));
  }

  Vector data(3 * h * w);
  const std::uint8_t* raster = bytes.data() + pos;
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) {
      for (Index c = 0; c < 3; ++c) {
        data((c * h + y) * w + x) = raster[(y * w + x) * 3 + c] / 255.0;
      }
    }
  }
  return MediaTensor(MediaShape::image(3, h, w), std::move(data));
}

std::vector<std::uint8_t> encode_ppm(const MediaTensor& img) {
  if (img.kind() != MediaKind::Image) throw Error(ErrorCode::ModalityMismatch, "PPM needs an image");
  const MediaShape& s = img.shape();
  const std::string header =
      "P6\n" + std::to_string(s.width) + " " + std::to_string(s.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + static_cast<std::size_t>(s.height * s.width * 3));
  for (Index y = 0; y < s.height; ++y) {
    for (Index x = 0; x < s.width; ++x) {
      for (Index c = 0; c < 3; ++c) {
        // Grayscale images are replicated into all three channels.
        out.push_back(quantize_byte(img.at(s.channels == 1 ? 0 : c, y, x)));
      }
    }
  }
  return out;
}

MediaTensor decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::MalformedHeader, "missing RIFF/WAVE header");
  }
  std::size_t pos = 12;
  bool have_fmt = false;
  std::uint32_t sample_rate = 0;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32le(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = bytes.size() - body;

    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || available < 16) throw Error(ErrorCode::TruncatedData, "short fmt chunk");
      const std::uint16_t format = read_u16le(bytes.data() + body);
      const std::uint16_t channels = read_u16le(bytes.data() + body + 2);
      sample_rate = read_u32le(bytes.data() + body + 4);
      const std::uint16_t bits = read_u16le(bytes.data() + body + 14);
      if (format != 1 || channels != 1 || bits != 16) {
        throw Error(ErrorCode::UnsupportedEncoding,
                    "need PCM16 mono, got format " + std::to_string(format) + ", " +
                        std::to_string(channels) + " channel(s), " + std::to_string(bits) +
                        " bits");
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw Error(ErrorCode::MalformedHeader, "data chunk before fmt chunk");
      if (size > available) {
        throw Error(ErrorCode::TruncatedData, "data chunk declares " + std::to_string(size) +
                                                  " bytes, " + std::to_string(available) +
                                                  " present");
      }
      if (size % 2 != 0) throw Error(ErrorCode::TruncatedData, "odd PCM16 data length");
      const Index n = size / 2;
      if (n < 1) throw Error(ErrorCode::TruncatedData, "no samples");
      Vector data(n);
      for (Index i = 0; i < n; ++i) {
        const auto s = static_cast<std::int16_t>(read_u16le(bytes.data() + body + 2 * i));
        data(i) = s / 32768.0;
      }
      return MediaTensor(MediaShape::audio(n), std::move(data), sample_rate);
    }
    if (size > available) throw Error(ErrorCode::TruncatedData, "chunk runs past end of file");
    pos = body + size + (size & 1u);
  }
  throw Error(have_fmt ? ErrorCode::TruncatedData : ErrorCode::MalformedHeader,
              "no data chunk found");
}

std::vector<std::uint8_t> encode_wav(const MediaTensor& audio) {
  if (audio.kind() != MediaKind::Audio) throw Error(ErrorCode::ModalityMismatch, "WAV needs audio");
  const auto n = static_cast<std::uint32_t>(audio.data().size());
  const std::uint32_t data_bytes = 2 * n;
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32le(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32le(out, 16);
  put_u16le(out, 1);
  put_u16le(out, 1);
  put_u32le(out, audio.sample_rate());
  put_u32le(out, audio.sample_rate() * 2);
  put_u16le(out, 2);
  put_u16le(out, 16);
  put_tag(out, "data");
  put_u32le(out, data_bytes);
  for (Index i = 0; i < audio.data().size(); ++i) {
    put_u16le(out, static_cast<std::uint16_t>(quantize_pcm16(audio[i])));
  }
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

MediaTensor load_image(const std::filesystem::path& path) { return decode_ppm(read_file(path)); }

void save_image(const MediaTensor& img, const std::filesystem::path& path) {
  write_file(path, encode_ppm(img));
}

MediaTensor load_audio(const std::filesystem::path& path) { return decode_wav(read_file(path)); }

void save_audio(const MediaTensor& audio, const std::filesystem::path& path) {
  write_file(path, encode_wav(audio));
}

MediaTensor load_media(const MediaPath& path) {
  const auto bytes = read_file(path.path);
  switch (detect_format(bytes)) {
    case MediaFormat::PpmP6: return decode_ppm(bytes);
    case MediaFormat::WavPcm16Mono: return decode_wav(bytes);
  }
  throw Error(ErrorCode::UnknownFormat, path.path.string());
}

void save_media(const MediaTensor& t, const std::filesystem::path& path) {
  if (t.kind() == MediaKind::Image) {
    save_image(t, path);
  } else {
    save_audio(t, path);
  }
}

}  // namespace crossfire
