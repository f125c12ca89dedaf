#pragma once
// Checkpoint container and JSON config.
//
// Binary layout (all little-endian):
//   "BFN2"                      4 bytes magic
//   u32 version                 currently 1
//   i32 L, r, omega_x, omega_y, m_x, m_y, direction, input_kind
//   u32 layer count
//   per layer: u64 n, n x f64 weights, u64 n, n x f64 biases
// Layer shapes are implied by the config, so the lengths only serve as a
// consistency check.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "json.hpp"

#include "bfnet/butterflynet.hpp"
#include "bfnet/error.hpp"

namespace bfnet {

inline constexpr std::array<char, 4> kCheckpointMagic{'B', 'F', 'N', '2'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  } else {
    return v;
  }
}

template <typename T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is, const std::string& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError(path + ": truncated checkpoint");
  return to_little(v);
}

inline void put_array(std::ostream& os, const std::vector<double>& a) {
  put<std::uint64_t>(os, a.size());
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(double)));
  } else {
    for (double v : a) put(os, v);
  }
}

inline void get_array(std::istream& is, std::vector<double>& a, const std::string& path) {
  const auto n = get<std::uint64_t>(is, path);
  if (n != a.size())
    throw IoError(path + ": array length " + std::to_string(n) + " does not match config (" +
                  std::to_string(a.size()) + ")");
  if constexpr (std::endian::native == std::endian::little) {
    if (!is.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(n * sizeof(double))))
      throw IoError(path + ": truncated checkpoint");
  } else {
    for (auto& v : a) v = get<double>(is, path);
  }
}

}  // namespace detail

inline void save_checkpoint(const ButterflyNet2D& net, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path + ": cannot open for writing");
  os.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  detail::put(os, kCheckpointVersion);
  const NetConfig& c = net.config;
  for (int v : {c.L, c.r, c.omega_x, c.omega_y, c.m_x, c.m_y, static_cast<int>(c.direction),
                static_cast<int>(c.input_kind)})
    detail::put<std::int32_t>(os, v);
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(net.layers.size()));
  for (const auto& l : net.layers) {
    detail::put_array(os, l.weight);
    detail::put_array(os, l.bias);
  }
  if (!os) throw IoError(path + ": write failed");
}

inline ButterflyNet2D load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path + ": cannot open");
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kCheckpointMagic) throw IoError(path + ": not a BFN2 checkpoint");
  const auto version = detail::get<std::uint32_t>(is, path);
  if (version != kCheckpointVersion) throw IoError(path + ": unsupported version " + std::to_string(version));
  std::array<std::int32_t, 8> f{};
  for (auto& v : f) v = detail::get<std::int32_t>(is, path);
  if (f[6] < 0 || f[6] > 1 || f[7] < 0 || f[7] > 1) throw IoError(path + ": bad enum field");
  NetConfig c{f[0], f[1], f[2], f[3], f[4], f[5], static_cast<Direction>(f[6]), static_cast<InputKind>(f[7])};
  ButterflyNet2D net;
  try {
    net = build(c);
  } catch (const InvalidArgument& e) {
    throw IoError(path + ": " + e.what());
  }
  const auto layers = detail::get<std::uint32_t>(is, path);
  if (layers != net.layers.size()) throw IoError(path + ": layer count does not match config");
  for (auto& l : net.layers) {
    detail::get_array(is, l.weight, path);
    detail::get_array(is, l.bias, path);
  }
  return net;
}

inline nlohmann::json to_json(const NetConfig& c) {
  return {{"L", c.L},         {"r", c.r},     {"omega_x", c.omega_x},
          {"omega_y", c.omega_y}, {"m_x", c.m_x}, {"m_y", c.m_y},
          {"direction", to_string(c.direction)}, {"input_kind", to_string(c.input_kind)}};
}

inline NetConfig config_from_json(const nlohmann::json& j) {
  try {
    NetConfig c;
    c.L = j.at("L").get<int>();
    c.r = j.at("r").get<int>();
    c.omega_x = j.at("omega_x").get<int>();
    c.omega_y = j.at("omega_y").get<int>();
    c.m_x = j.at("m_x").get<int>();
    c.m_y = j.at("m_y").get<int>();
    const auto d = j.value("direction", std::string("forward"));
    if (d != "forward" && d != "inverse") throw InvalidArgument("config: direction must be forward or inverse");
    c.direction = d == "forward" ? Direction::forward : Direction::inverse;
    const auto k = j.value("input_kind", std::string("real"));
    if (k != "real" && k != "complex") throw InvalidArgument("config: input_kind must be real or complex");
    c.input_kind = k == "real" ? InputKind::real : InputKind::complex;
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
}

}  // namespace bfnet
