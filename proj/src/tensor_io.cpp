#include "vididi/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace vididi {

namespace {

constexpr char kMagic[4] = {'V', 'D', 'D', 'I'};

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xffu));
  }
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <typename U>
  U get() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
    pos_ += sizeof(U);
    return v;
  }
  std::string get_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw std::runtime_error("tensor file: truncated data");
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_tensors(const std::vector<StoredTensor>& tensors) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, kTensorFileVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    std::uint64_t count = 1;
    for (auto d : t.dims) count *= d;
    if (count != t.data.size()) {
      throw std::invalid_argument("encode_tensors: '" + t.name + "' payload does not match dims");
    }
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) put_le<std::uint64_t>(out, d);
    for (float f : t.data) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

std::vector<StoredTensor> decode_tensors(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw std::runtime_error("tensor file: bad magic");
  }
  Reader r(bytes);
  r.get_string(4);
  const auto version = r.get<std::uint32_t>();
  if (version != kTensorFileVersion) {
    throw std::runtime_error("tensor file: unsupported version " + std::to_string(version));
  }
  const auto count = r.get<std::uint32_t>();
  std::vector<StoredTensor> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    StoredTensor t;
    t.name = r.get_string(r.get<std::uint32_t>());
    const auto rank = r.get<std::uint32_t>();
    std::uint64_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      t.dims.push_back(r.get<std::uint64_t>());
      n *= t.dims.back();
    }
    if (n > bytes.size()) throw std::runtime_error("tensor file: implausible tensor size");
    t.data.resize(n);
    for (auto& f : t.data) f = std::bit_cast<float>(r.get<std::uint32_t>());
    out.push_back(std::move(t));
  }
  if (!r.done()) throw std::runtime_error("tensor file: trailing bytes");
  return out;
}

void write_tensor_file(const std::filesystem::path& path, const std::vector<StoredTensor>& tensors) {
  const auto bytes = encode_tensors(tensors);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::vector<StoredTensor> read_tensor_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_tensors(bytes);
}

std::vector<StoredTensor> to_stored(const ParamSet& params, const std::string& prefix) {
  std::vector<StoredTensor> out;
  for (const auto& t : params.tensors()) {
    StoredTensor s;
    s.name = prefix + t.name;
    if (t.rank == 1) {
      s.dims = {static_cast<std::uint64_t>(t.value.size())};
    } else {
      s.dims = {static_cast<std::uint64_t>(t.value.rows()), static_cast<std::uint64_t>(t.value.cols())};
    }
    s.data.reserve(static_cast<std::size_t>(t.value.size()));
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.value.cols(); ++c) s.data.push_back(static_cast<float>(t.value(r, c)));
    }
    out.push_back(std::move(s));
  }
  return out;
}

ParamSet params_from_stored(const std::vector<StoredTensor>& tensors, const std::string& prefix) {
  ParamSet params;
  for (const auto& s : tensors) {
    if (s.name.compare(0, prefix.size(), prefix) != 0) continue;
    const std::string name = s.name.substr(prefix.size());
    Eigen::Index rows = 0, cols = 1;
    int rank = static_cast<int>(s.dims.size());
    if (rank == 1) {
      rows = static_cast<Eigen::Index>(s.dims[0]);
    } else if (rank == 2) {
      rows = static_cast<Eigen::Index>(s.dims[0]);
      cols = static_cast<Eigen::Index>(s.dims[1]);
    } else {
      throw std::runtime_error("checkpoint: tensor '" + s.name + "' has unsupported rank");
    }
    params.add(name, rows, cols, rank);
    auto& m = params.mut(name);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = static_cast<double>(s.data[k++]);
    }
  }
  return params;
}

StoredTensor video_to_stored(const VideoTensor& video, const std::string& name) {
  StoredTensor s;
  s.name = name;
  s.dims = {video.channels(), video.frames(), video.height(), video.width()};
  s.data.reserve(video.size());
  for (double v : video.data()) s.data.push_back(static_cast<float>(v));
  return s;
}

VideoTensor video_from_stored(const StoredTensor& tensor) {
  if (tensor.dims.size() != 4) throw std::runtime_error("video tensor must have rank 4");
  std::vector<double> data(tensor.data.begin(), tensor.data.end());
  return VideoTensor(tensor.dims[0], tensor.dims[1], tensor.dims[2], tensor.dims[3], std::move(data));
}

}  // namespace vididi
