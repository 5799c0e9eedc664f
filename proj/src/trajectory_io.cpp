#include "glasdi/trajectory_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "glasdi/errors.hpp"

namespace glasdi {

namespace {

constexpr char kMagic[5] = {'G', 'L', 'S', 'D', '1'};

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFU));
  }
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    need(sizeof(U));
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }

  void expect_magic() {
    need(sizeof(kMagic));
    if (std::memcmp(bytes_.data() + pos_, kMagic, sizeof(kMagic)) != 0) {
      throw FormatError("not a GLSD1 trajectory (bad magic)");
    }
    pos_ += sizeof(kMagic);
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw FormatError("truncated GLSD1 trajectory");
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

void put_matrix(std::string& out, const Eigen::MatrixXd& m) {
  // Column n of the matrix is snapshot n, written contiguously.
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) put_le(out, m(r, c));
  }
}

Eigen::MatrixXd get_matrix(Reader& in, std::uint32_t rows, std::uint32_t cols) {
  Eigen::MatrixXd m(rows, cols);
  for (std::uint32_t c = 0; c < cols; ++c) {
    for (std::uint32_t r = 0; r < rows; ++r) m(r, c) = in.get<double>();
  }
  return m;
}

}  // namespace

std::string encode_trajectory(const Trajectory& traj) {
  const auto rows = traj.snapshots.rows();
  const auto cols = traj.snapshots.cols();
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (rows > kMax || cols > kMax) throw FormatError("trajectory too large for GLSD1");
  if (traj.has_derivatives() &&
      (traj.derivatives.rows() != rows || traj.derivatives.cols() != cols)) {
    throw DimensionMismatch("derivative matrix shape differs from snapshots");
  }
  std::string out;
  std::size_t blocks = traj.has_derivatives() ? 2 : 1;
  out.reserve(32 + 8 * traj.mu.dim() + blocks * 8 * static_cast<std::size_t>(rows * cols));
  out.append(kMagic, sizeof(kMagic));
  put_le(out, static_cast<std::uint32_t>(rows));
  put_le(out, static_cast<std::uint32_t>(cols));
  put_le(out, traj.dt);
  put_le(out, static_cast<std::uint32_t>(traj.mu.dim()));
  for (double v : traj.mu.values) put_le(out, v);
  put_matrix(out, traj.snapshots);
  if (traj.has_derivatives()) put_matrix(out, traj.derivatives);
  return out;
}

Trajectory decode_trajectory(const std::string& bytes) {
  Reader in(bytes);
  in.expect_magic();
  const auto n_u = in.get<std::uint32_t>();
  const auto n_snap = in.get<std::uint32_t>();
  Trajectory traj;
  traj.dt = in.get<double>();
  const auto pdim = in.get<std::uint32_t>();
  traj.mu.values.resize(pdim);
  for (auto& v : traj.mu.values) v = in.get<double>();
  const std::size_t block = 8ULL * n_u * n_snap;
  if (in.remaining() != block && in.remaining() != 2 * block) {
    throw FormatError("GLSD1 payload length does not match header");
  }
  const bool with_derivatives = in.remaining() == 2 * block && block > 0;
  traj.snapshots = get_matrix(in, n_u, n_snap);
  if (with_derivatives) traj.derivatives = get_matrix(in, n_u, n_snap);
  return traj;
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
  const std::string bytes = encode_trajectory(traj);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing " + path.string());
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_trajectory(bytes);
}

}  // namespace glasdi
