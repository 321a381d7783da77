#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "qedlat/experiments.hpp"

namespace qedlat {

namespace {

constexpr char kMagic[8] = {'Q', 'E', 'D', 'L', 'A', 'T', 'C', 'K'};

template <class T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(std::uint8_t((std::uint64_t(v) >> (8 * i)) & 0xff));
}

template <class T>
T get_le(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  if (in.size() - pos < sizeof(T)) throw CheckpointError("checkpoint truncated");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t(in[pos + i]) << (8 * i);
  pos += sizeof(T);
  return T(v);
}

std::uint32_t crc_of(const std::vector<std::uint8_t>& d) {
  return std::uint32_t(crc32(crc32(0L, Z_NULL, 0), d.data(), uInt(d.size())));
}

}  // namespace

void Checkpoint::put(const std::string& name, const std::vector<double>& v) {
  std::vector<std::uint8_t> d;
  d.reserve(8 * v.size());
  for (double x : v) put_le(d, std::bit_cast<std::uint64_t>(x));
  sections[name] = std::move(d);
}

void Checkpoint::put(const std::string& name, const std::string& s) { sections[name].assign(s.begin(), s.end()); }

std::vector<double> Checkpoint::doubles(const std::string& name) const {
  auto it = sections.find(name);
  if (it == sections.end()) throw CheckpointError("checkpoint has no section '" + name + "'");
  const auto& d = it->second;
  if (d.size() % 8 != 0) throw CheckpointError("section '" + name + "' is not a double array");
  std::vector<double> v(d.size() / 8);
  std::size_t pos = 0;
  for (double& x : v) x = std::bit_cast<double>(get_le<std::uint64_t>(d, pos));
  return v;
}

std::string Checkpoint::text(const std::string& name) const {
  auto it = sections.find(name);
  if (it == sections.end()) throw CheckpointError("checkpoint has no section '" + name + "'");
  return {it->second.begin(), it->second.end()};
}

void Checkpoint::save(const std::string& path) const {
  std::vector<std::uint8_t> out(kMagic, kMagic + 8);
  put_le(out, kCheckpointVersion);
  put_le(out, std::uint32_t(sections.size()));
  for (const auto& [name, data] : sections) {
    put_le(out, std::uint32_t(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_le(out, std::uint64_t(data.size()));
    put_le(out, crc_of(data));
    out.insert(out.end(), data.begin(), data.end());
  }
  // write aside and rename so an interrupted save never replaces a good file
  const std::string tmp = path + ".part";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw OutputError("cannot open " + tmp + " for writing");
    f.write(reinterpret_cast<const char*>(out.data()), std::streamsize(out.size()));
    f.flush();
    if (!f) throw OutputError("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw OutputError("cannot move " + tmp + " to " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint " + path);
  const std::vector<std::uint8_t> in{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  if (in.size() < 16 || std::memcmp(in.data(), kMagic, 8) != 0) throw CheckpointError(path + " is not a checkpoint");
  std::size_t pos = 8;
  const auto version = get_le<std::uint32_t>(in, pos);
  if (version != kCheckpointVersion)
    throw CheckpointError("checkpoint version " + std::to_string(version) + ", expected " +
                          std::to_string(kCheckpointVersion));
  const auto count = get_le<std::uint32_t>(in, pos);
  Checkpoint ck;
  for (std::uint32_t s = 0; s < count; ++s) {
    const auto nlen = get_le<std::uint32_t>(in, pos);
    if (in.size() - pos < nlen) throw CheckpointError("checkpoint truncated");
    std::string name(in.begin() + pos, in.begin() + pos + nlen);
    pos += nlen;
    const auto dlen = get_le<std::uint64_t>(in, pos);
    const auto crc = get_le<std::uint32_t>(in, pos);
    if (in.size() - pos < dlen) throw CheckpointError("checkpoint truncated in section '" + name + "'");
    std::vector<std::uint8_t> data(in.begin() + pos, in.begin() + pos + std::ptrdiff_t(dlen));
    pos += dlen;
    if (crc_of(data) != crc) throw CheckpointError("checksum failure in section '" + name + "'");
    ck.sections[name] = std::move(data);
  }
  if (pos != in.size()) throw CheckpointError("trailing bytes after the last checkpoint section");
  return ck;
}

}  // namespace qedlat
