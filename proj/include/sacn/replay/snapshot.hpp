#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "sacn/replay/replay_buffer.hpp"

namespace sacn::replay {

// Snapshot layout, all scalars little-endian:
//   char[8]  magic "SACNRB01"
//   u32      version (1)
//   u32      state_dim, u32 action_dim
//   u64      capacity, u64 size, u64 total_pushed
//   size records, oldest first:
//     f64[state_dim] state, f64[action_dim] action, f64 reward,
//     f64[state_dim] next_state, u8 terminal, u8 truncated,
//     f64 behavior_log_density, i64 episode_id, i64 step_index
inline constexpr std::array<char, 8> kSnapshotMagic{'S', 'A', 'C', 'N', 'R', 'B', '0', '1'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

namespace detail {

template <class T>
void put(std::ostream& os, T v) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(bytes.data(), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  std::array<char, sizeof(T)> bytes;
  if (!is.read(bytes.data(), sizeof(T))) throw ConfigError("replay snapshot truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T v;
  std::memcpy(&v, bytes.data(), sizeof(T));
  return v;
}

}  // namespace detail

struct SnapshotAccess {
  static void set_counters(ReplayBuffer& b, std::uint64_t total) {
    const std::uint64_t shift = total - b.total_;
    b.total_ = total;
    b.last_end_ += shift;
  }
};

inline void write_snapshot(std::ostream& os, const ReplayBuffer& buf) {
  os.write(kSnapshotMagic.data(), kSnapshotMagic.size());
  detail::put<std::uint32_t>(os, kSnapshotVersion);
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(buf.state_dim()));
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(buf.action_dim()));
  detail::put<std::uint64_t>(os, buf.capacity());
  detail::put<std::uint64_t>(os, buf.size());
  detail::put<std::uint64_t>(os, buf.total_pushed());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const Transition t = buf.at(i);
    for (double x : t.state) detail::put(os, x);
    for (double x : t.action) detail::put(os, x);
    detail::put(os, t.reward);
    for (double x : t.next_state) detail::put(os, x);
    detail::put<std::uint8_t>(os, t.terminal ? 1 : 0);
    detail::put<std::uint8_t>(os, t.truncated ? 1 : 0);
    detail::put(os, t.behavior_log_density);
    detail::put(os, t.episode_id);
    detail::put(os, t.step_index);
  }
  if (!os) throw ConfigError("replay snapshot write failed");
}

inline ReplayBuffer read_snapshot(std::istream& is) {
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kSnapshotMagic) {
    throw ConfigError("not a replay snapshot (bad magic)");
  }
  const auto version = detail::get<std::uint32_t>(is);
  if (version != kSnapshotVersion) {
    throw ConfigError("unsupported replay snapshot version " + std::to_string(version));
  }
  const auto sd = detail::get<std::uint32_t>(is);
  const auto ad = detail::get<std::uint32_t>(is);
  const auto capacity = detail::get<std::uint64_t>(is);
  const auto size = detail::get<std::uint64_t>(is);
  const auto total = detail::get<std::uint64_t>(is);
  if (size > capacity || total < size) throw ConfigError("replay snapshot header inconsistent");
  ReplayBuffer buf(sd, ad, capacity);
  for (std::uint64_t i = 0; i < size; ++i) {
    Transition t;
    t.state.resize(sd);
    t.action.resize(ad);
    t.next_state.resize(sd);
    for (double& x : t.state) x = detail::get<double>(is);
    for (double& x : t.action) x = detail::get<double>(is);
    t.reward = detail::get<double>(is);
    for (double& x : t.next_state) x = detail::get<double>(is);
    t.terminal = detail::get<std::uint8_t>(is) != 0;
    t.truncated = detail::get<std::uint8_t>(is) != 0;
    t.behavior_log_density = detail::get<double>(is);
    t.episode_id = detail::get<std::int64_t>(is);
    t.step_index = detail::get<std::int64_t>(is);
    buf.push(t);
  }
  SnapshotAccess::set_counters(buf, total);
  return buf;
}

inline void save_snapshot(const std::string& path, const ReplayBuffer& buf) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  write_snapshot(os, buf);
}

inline ReplayBuffer load_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  return read_snapshot(is);
}

}  // namespace sacn::replay
