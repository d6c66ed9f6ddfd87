// SPDX-License-Identifier: Apache-2.0
#include <nilm/core/error.hpp>
#include <nilm/data/container.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nilm {

namespace {

template <typename U> U swap_bytes(U v) {
  U out = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    out = U(out << 8) | U((v >> (8 * i)) & 0xff);
  return out;
}

template <typename U> void put_le(std::string &out, U v) {
  if constexpr (std::endian::native == std::endian::big)
    v = swap_bytes(v);
  char buf[sizeof(U)];
  std::memcpy(buf, &v, sizeof(U));
  out.append(buf, sizeof(U));
}

class Reader {
 public:
  explicit Reader(const std::string &bytes) : bytes_(bytes) {}

  template <typename U> U get() {
    need(sizeof(U));
    U v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(U));
    pos_ += sizeof(U);
    if constexpr (std::endian::native == std::endian::big)
      v = swap_bytes(v);
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n)
      throw FormatError("container truncated at byte " + std::to_string(pos_));
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string &bytes_;
  std::size_t pos_ = 0;
};

template <typename Element> using Bits =
  std::conditional_t<sizeof(Element) == 4, std::uint32_t, std::uint64_t>;

} // namespace

template <typename Element>
std::string encode_container(const Magic &magic, const Container<Element> &c) {
  std::string out(magic.data(), magic.size());
  put_le<std::uint32_t>(out, c.version);
  put_le<std::uint32_t>(out, std::uint32_t(c.header.size()));
  out += c.header;
  put_le<std::uint32_t>(out, std::uint32_t(c.blobs.size()));
  for (const auto &b : c.blobs) {
    put_le<std::uint32_t>(out, std::uint32_t(b.name.size()));
    out += b.name;
    put_le<std::uint32_t>(out, std::uint32_t(b.extents.size()));
    std::uint64_t n = 1;
    for (auto e : b.extents) {
      put_le<std::uint64_t>(out, e);
      n *= e;
    }
    if (n != b.values.size())
      throw FormatError("blob '" + b.name + "' extents do not match its size");
    for (Element v : b.values)
      put_le<Bits<Element>>(out, std::bit_cast<Bits<Element>>(v));
  }
  return out;
}

template <typename Element>
Container<Element> decode_container(const Magic &magic,
                                    const std::string &bytes) {
  if (bytes.size() < magic.size() ||
      std::memcmp(bytes.data(), magic.data(), magic.size()) != 0)
    throw FormatError("bad magic: expected '" +
                      std::string(magic.data(), magic.size()) + "'");
  const std::string body = bytes.substr(magic.size());
  Reader r(body);
  Container<Element> c;
  c.version = r.get<std::uint32_t>();
  c.header = r.get_string();
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t k = 0; k < count; ++k) {
    Blob<Element> b;
    b.name = r.get_string();
    const auto rank = r.get<std::uint32_t>();
    std::uint64_t n = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      b.extents.push_back(r.get<std::uint64_t>());
      n *= b.extents.back();
    }
    r.need(n * sizeof(Element));
    b.values.resize(n);
    for (auto &v : b.values)
      v = std::bit_cast<Element>(r.get<Bits<Element>>());
    c.blobs.push_back(std::move(b));
  }
  if (!r.done())
    throw FormatError("trailing bytes after last blob");
  return c;
}

void write_file(const std::string &path, const std::string &bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw FileError("cannot open '" + path + "' for writing");
  f.write(bytes.data(), std::streamsize(bytes.size()));
  if (!f)
    throw FileError("write to '" + path + "' failed");
}

std::string read_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw FileError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

template std::string encode_container(const Magic &, const Container<float> &);
template std::string encode_container(const Magic &, const Container<double> &);
template Container<float> decode_container(const Magic &, const std::string &);
template Container<double> decode_container(const Magic &, const std::string &);

} // namespace nilm
