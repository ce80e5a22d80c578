#include "fpt/numeric/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fpt/error.hpp"

namespace fpt::checkpoint {
namespace {

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw ParseError("checkpoint truncated at byte " + std::to_string(pos_));
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize(const ParamStore& params) {
  std::string out(kMagic, 8);
  put_u64(out, params.size());
  for (const auto& [name, t] : params) {
    put_u64(out, name.size());
    out += name;
    put_u64(out, 2);
    put_u64(out, static_cast<std::uint64_t>(t.rows()));
    put_u64(out, static_cast<std::uint64_t>(t.cols()));
    for (Index i = 0; i < t.size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(t.data()[i]));
  }
  return out;
}

ParamStore deserialize(const std::string& bytes) {
  Reader in(bytes);
  if (in.take(8) != std::string(kMagic, 8)) throw ParseError("checkpoint: bad magic");
  const std::uint64_t count = in.u64();
  ParamStore params;
  for (std::uint64_t n = 0; n < count; ++n) {
    const std::uint64_t len = in.u64();
    std::string name = in.take(len);
    const std::uint64_t rank = in.u64();
    if (rank < 1 || rank > 2) {
      throw ParseError("checkpoint: tensor '" + name + "' has unsupported rank " +
                       std::to_string(rank));
    }
    std::uint64_t extents[2] = {1, 1};
    for (std::uint64_t r = 0; r < rank; ++r) extents[2 - rank + r] = in.u64();
    TensorD t(static_cast<Index>(extents[0]), static_cast<Index>(extents[1]));
    for (Index i = 0; i < t.size(); ++i) t.data()[i] = std::bit_cast<double>(in.u64());
    params.add(name, std::move(t));
  }
  if (!in.done()) throw ParseError("checkpoint: trailing bytes after last tensor");
  return params;
}

void save(const std::filesystem::path& path, const ParamStore& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  const std::string bytes = serialize(params);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

ParamStore load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return deserialize(ss.str());
}

}  // namespace fpt::checkpoint
