#include "adjstep/io.hpp"

#include "adjstep/error.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace adjstep {

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

constexpr char kTrajMagic[8] = {'A', 'D', 'J', 'T', 'R', 'A', 'J', '1'};
constexpr char kDualMagic[8] = {'A', 'D', 'J', 'D', 'U', 'A', 'L', '1'};

class Writer {
 public:
  template <class T>
  void put(const T& v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  void string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void field(const Field& f) {
    put<std::uint64_t>(static_cast<std::uint64_t>(f.size()));
    bytes(f.data(), sizeof(double) * static_cast<std::size_t>(f.size()));
  }
  std::uint64_t finish(const std::string& path) {
    const std::uint64_t sum = fnv1a(buf_.data(), buf_.size());
    put(sum);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ArtifactError("cannot write '" + path + "'");
    out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw ArtifactError("write failed for '" + path + "'");
    return sum;
  }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(const std::string& path, const char (&magic)[8]) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError("cannot open '" + path + "'");
    buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    if (buf_.size() < 8 + 4 + 8 || std::memcmp(buf_.data(), magic, 8) != 0)
      throw ArtifactError("'" + path + "' is not a " + std::string(magic, 8) + " container");
    std::uint64_t stored;
    std::memcpy(&stored, buf_.data() + buf_.size() - 8, 8);
    checksum_ = fnv1a(buf_.data(), buf_.size() - 8);
    if (stored != checksum_) throw ArtifactError("checksum mismatch in '" + path + "'");
    end_ = buf_.size() - 8;
    pos_ = 8;
    const auto version = get<std::uint32_t>();
    if (version != kArtifactVersion)
      throw ArtifactError("'" + path + "' has format version " + std::to_string(version) + ", expected " +
                          std::to_string(kArtifactVersion));
  }
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  Field field() {
    const auto n = get<std::uint64_t>();
    need(n * sizeof(double));
    Field f(static_cast<Eigen::Index>(n));
    std::memcpy(f.data(), buf_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return f;
  }
  void done() const {
    if (pos_ != end_) throw ArtifactError("trailing bytes in '" + path_ + "'");
  }
  std::uint64_t checksum() const { return checksum_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > end_) throw ArtifactError("truncated container '" + path_ + "'");
  }
  std::string path_;
  std::vector<char> buf_;
  std::size_t pos_ = 0, end_ = 0;
  std::uint64_t checksum_ = 0;
};

}  // namespace

std::uint64_t write_trajectory(const std::string& path, const Trajectory& traj) {
  Writer w;
  w.bytes(kTrajMagic, 8);
  w.put<std::uint32_t>(kArtifactVersion);
  w.put<std::int32_t>(traj.n_vars);
  w.put<std::int32_t>(traj.level);
  w.put<std::uint64_t>(traj.mesh_hash);
  w.string(traj.scenario);
  w.put<std::uint64_t>(traj.records.size());
  for (const StepRecord& r : traj.records) {
    w.put(r.t);
    w.put(r.dt);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(r.mode));
    w.put<std::int32_t>(r.newton_iters);
    w.put<std::int32_t>(r.linear_iters);
    w.put(r.initial_residual);
    w.put(r.final_residual);
    w.field(r.field);
  }
  return w.finish(path);
}

Trajectory read_trajectory(const std::string& path, std::uint64_t* checksum) {
  Reader r(path, kTrajMagic);
  Trajectory t;
  t.n_vars = r.get<std::int32_t>();
  t.level = r.get<std::int32_t>();
  t.mesh_hash = r.get<std::uint64_t>();
  t.scenario = r.string();
  const auto n = r.get<std::uint64_t>();
  for (std::uint64_t k = 0; k < n; ++k) {
    StepRecord s;
    s.t = r.get<double>();
    s.dt = r.get<double>();
    const auto mode = r.get<std::uint8_t>();
    if (mode > 1) throw ArtifactError("invalid step mode in '" + path + "'");
    s.mode = static_cast<StepMode>(mode);
    s.newton_iters = r.get<std::int32_t>();
    s.linear_iters = r.get<std::int32_t>();
    s.initial_residual = r.get<double>();
    s.final_residual = r.get<double>();
    s.field = r.field();
    t.records.push_back(std::move(s));
  }
  r.done();
  if (checksum) *checksum = r.checksum();
  return t;
}

std::uint64_t write_dual(const std::string& path, const DualSolution& dual, const DualHeader& header) {
  Writer w;
  w.bytes(kDualMagic, 8);
  w.put<std::uint32_t>(kArtifactVersion);
  w.put<std::int32_t>(dual.dim);
  w.put<std::int32_t>(dual.n_vars);
  w.put<std::uint64_t>(header.mesh_hash);
  w.put<std::uint64_t>(header.source_checksum);
  w.put<std::uint64_t>(dual.w.size());
  for (std::size_t m = 0; m < dual.w.size(); ++m) {
    w.put(dual.t[m]);
    w.put<std::int32_t>(m < dual.substeps.size() ? dual.substeps[m] : 0);
    w.field(dual.w[m]);
  }
  return w.finish(path);
}

DualSolution read_dual(const std::string& path, DualHeader* header) {
  Reader r(path, kDualMagic);
  DualSolution d;
  d.dim = r.get<std::int32_t>();
  d.n_vars = r.get<std::int32_t>();
  DualHeader h;
  h.mesh_hash = r.get<std::uint64_t>();
  h.source_checksum = r.get<std::uint64_t>();
  const auto n = r.get<std::uint64_t>();
  for (std::uint64_t k = 0; k < n; ++k) {
    d.t.push_back(r.get<double>());
    d.substeps.push_back(r.get<std::int32_t>());
    d.w.push_back(r.field());
  }
  r.done();
  if (header) *header = h;
  return d;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_stats_csv(std::ostream& os, const Trajectory& traj) {
  os << "step,t,dt,mode,newton_iters,linear_iters,initial_residual,final_residual\n";
  for (std::size_t k = 1; k < traj.records.size(); ++k) {
    const StepRecord& r = traj.records[k];
    os << k << ',' << format_double(r.t) << ',' << format_double(r.dt) << ',' << to_string(r.mode) << ','
       << r.newton_iters << ',' << r.linear_iters << ',' << format_double(r.initial_residual) << ','
       << format_double(r.final_residual) << '\n';
  }
}

void write_functional_csv(std::ostream& os, const std::vector<TracePoint>& trace) {
  os << "t,dt,integrand,cumulative\n";
  for (const TracePoint& p : trace)
    os << format_double(p.t) << ',' << format_double(p.dt) << ',' << format_double(p.integrand) << ','
       << format_double(p.cumulative) << '\n';
}

std::vector<TracePoint> read_functional_csv(std::istream& is) {
  std::string line;
  while (std::getline(is, line) && !line.empty() && line[0] == '#') {
  }
  if (line != "t,dt,integrand,cumulative")
    throw ArtifactError("functional CSV has an unexpected header");
  std::vector<TracePoint> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    TracePoint p;
    char c1, c2, c3;
    std::istringstream ls(line);
    if (!(ls >> p.t >> c1 >> p.dt >> c2 >> p.integrand >> c3 >> p.cumulative))
      throw ArtifactError("malformed functional CSV line: " + line);
    out.push_back(p);
  }
  return out;
}

void write_indicators_csv(std::ostream& os, const ErrorBreakdown& b) {
  os << "n,t,dt,eta_k_bar\n";
  for (const IntervalIndicator& iv : b.intervals)
    os << iv.n << ',' << format_double(iv.t) << ',' << format_double(iv.dt) << ',' << format_double(iv.value)
       << '\n';
}

std::vector<IntervalIndicator> read_indicators_csv(std::istream& is) {
  std::string line;
  while (std::getline(is, line) && !line.empty() && line[0] == '#') {
  }
  if (line != "n,t,dt,eta_k_bar") throw ArtifactError("indicator CSV has an unexpected header");
  std::vector<IntervalIndicator> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    IntervalIndicator iv;
    char c1, c2, c3;
    std::istringstream ls(line);
    if (!(ls >> iv.n >> c1 >> iv.t >> c2 >> iv.dt >> c3 >> iv.value))
      throw ArtifactError("malformed indicator CSV line: " + line);
    out.push_back(iv);
  }
  return out;
}

void write_dual_norms_csv(std::ostream& os, const DualSolution& dual, const std::vector<double>& norms) {
  os << "level,t,substeps,norm\n";
  for (std::size_t m = 0; m < norms.size(); ++m)
    os << m << ',' << format_double(dual.t[m]) << ',' << (m < dual.substeps.size() ? dual.substeps[m] : 0) << ','
       << format_double(norms[m]) << '\n';
}

void write_summary(std::ostream& os, const ErrorBreakdown& b) {
  os << "eta_k " << format_double(b.eta_k) << "\n";
  os << "eta_h " << format_double(b.eta_h) << "\n";
  os << "eta " << format_double(b.eta) << "\n";
  os << "eta_k_bar " << format_double(b.eta_k_bar) << "\n";
  os << "eta_h_bar " << format_double(b.eta_h_bar) << "\n";
  if (b.theta_eff) os << "theta_eff " << format_double(*b.theta_eff) << "\n";
}

}  // namespace adjstep
