#include "htrpm/io.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "htrpm/serialize.hpp"

namespace htrpm {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, int line_no, const char* what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("line " + std::to_string(line_no) + ": bad " +
                                what + " value '" + s + "'");
  }
}

long parse_long(const std::string& s, int line_no, const char* what) {
  try {
    std::size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("line " + std::to_string(line_no) + ": bad " +
                                what + " value '" + s + "'");
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

json truth_to_json(const ScenarioTruth& t) {
  json j;
  j["scenario"] = t.scenario;
  j["mu_eta"] = t.mu_eta;
  j["cluster"] = t.cluster;
  j["smooth"] = t.smooth;
  j["gamma"] = t.gamma;
  j["theta"] = to_json(t.theta);
  j["eta"] = to_json(t.eta);
  return j;
}

ScenarioTruth truth_from_json(const json& j) {
  ScenarioTruth t;
  t.scenario = j.at("scenario").get<int>();
  t.mu_eta = j.at("mu_eta").get<double>();
  t.cluster = j.at("cluster").get<std::vector<int>>();
  t.smooth = j.at("smooth").get<std::vector<std::vector<double>>>();
  t.gamma = j.at("gamma").get<std::vector<unsigned char>>();
  t.theta = matrix_from_json(j.at("theta"));
  t.eta = matrix_from_json(j.at("eta"));
  return t;
}

}  // namespace

void write_data_csv(const std::string& path, const PanelDataset& data) {
  int d_z = data.d_z(), d_x = data.d_x();
  std::ostringstream out;
  out << "participant_id,period,time,y";
  for (int k = 1; k <= d_z; ++k) out << ",z" << k;
  for (int k = 1; k <= d_x; ++k) out << ",x" << k;
  out << '\n';
  for (int i = 0; i < data.n_participants; ++i) {
    for (int j = 0; j < data.n_periods; ++j) {
      const PanelCell& cell = data.cell(i, j);
      for (int m = 0; m < cell.size(); ++m) {
        double t = data.time_offset + data.time_scale * cell.times[m];
        out << (i + 1) << ',' << (j + 1) << ',' << fmt_double(t) << ','
            << static_cast<int>(cell.y[m]);
        for (int k = 0; k < d_z; ++k) out << ',' << fmt_double(cell.z[k]);
        for (int k = 0; k < d_x; ++k) out << ',' << fmt_double(cell.x[k]);
        out << '\n';
      }
    }
  }
  write_file(path, out.str());
}

PanelDataset read_data_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open data file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty data file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header = split_csv_line(line);
  const char* fixed[] = {"participant_id", "period", "time", "y"};
  if (header.size() < 4) throw std::invalid_argument("line 1: incomplete header");
  for (int k = 0; k < 4; ++k) {
    if (trim(header[k]) != fixed[k]) {
      throw std::invalid_argument(std::string("line 1: expected column '") +
                                  fixed[k] + "', found '" + header[k] + "'");
    }
  }
  int d_z = 0, d_x = 0;
  std::size_t col = 4;
  while (col < header.size() && trim(header[col]) == "z" + std::to_string(d_z + 1)) {
    ++d_z;
    ++col;
  }
  while (col < header.size() && trim(header[col]) == "x" + std::to_string(d_x + 1)) {
    ++d_x;
    ++col;
  }
  if (col != header.size()) {
    throw std::invalid_argument("line 1: unexpected column '" + header[col] + "'");
  }

  struct Row {
    int i, j, line_no;
    double t;
    int y;
    Eigen::VectorXd z, x;
  };
  std::vector<Row> rows;
  int max_i = 0, max_j = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (static_cast<int>(f.size()) != 4 + d_z + d_x) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(4 + d_z + d_x) + " fields, found " +
                                  std::to_string(f.size()));
    }
    Row r;
    r.line_no = line_no;
    r.i = static_cast<int>(parse_long(f[0], line_no, "participant_id"));
    r.j = static_cast<int>(parse_long(f[1], line_no, "period"));
    if (r.i < 1) throw std::invalid_argument("line " + std::to_string(line_no) + ": participant_id must be >= 1");
    if (r.j < 1) throw std::invalid_argument("line " + std::to_string(line_no) + ": period must be >= 1");
    r.t = parse_double(f[2], line_no, "time");
    long y = parse_long(f[3], line_no, "y");
    if (y != 0 && y != 1) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": y must be 0 or 1");
    }
    r.y = static_cast<int>(y);
    r.z.resize(d_z);
    for (int k = 0; k < d_z; ++k) r.z[k] = parse_double(f[4 + k], line_no, "z");
    r.x.resize(d_x);
    for (int k = 0; k < d_x; ++k) r.x[k] = parse_double(f[4 + d_z + k], line_no, "x");
    max_i = std::max(max_i, r.i);
    max_j = std::max(max_j, r.j);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw std::invalid_argument("data file has no observation rows");

  PanelDataset data;
  data.n_participants = max_i;
  data.n_periods = max_j;
  data.cells.resize(static_cast<std::size_t>(max_i) * max_j);
  for (const Row& r : rows) {
    PanelCell& cell = data.cell(r.i - 1, r.j - 1);
    if (cell.times.empty()) {
      cell.z = r.z;
      cell.x = r.x;
    } else if (cell.z != r.z || cell.x != r.x) {
      throw std::invalid_argument("line " + std::to_string(r.line_no) +
                                  ": covariates differ from earlier rows of (i=" +
                                  std::to_string(r.i) + ", j=" + std::to_string(r.j) + ")");
    }
    cell.times.push_back(r.t);
    cell.y.push_back(static_cast<std::int8_t>(r.y));
  }
  return data;
}

void write_truth_json(const std::string& path, const ScenarioTruth& truth) {
  write_file(path, truth_to_json(truth).dump() + "\n");
}

ScenarioTruth read_truth_json(const std::string& path) {
  return truth_from_json(json::parse(read_file(path)));
}

void write_archive(const std::string& path, const ChainArchive& archive) {
  json header;
  header["format"] = "htrpm-archive";
  header["version"] = 1;
  header["n_participants"] = archive.n_participants;
  header["n_periods"] = archive.n_periods;
  header["q"] = archive.q;
  header["d_z"] = archive.d_z;
  header["d_x"] = archive.d_x;
  header["variant"] = variant_name(archive.variant);
  header["seed"] = archive.seed;
  header["fingerprint"] = archive.fingerprint;
  header["iterations"] = archive.iterations;
  header["burnin"] = archive.burnin;
  header["thinning"] = archive.thinning;
  header["n_draws"] = archive.draws.size();

  std::string raw = header.dump() + "\n";
  for (const Draw& d : archive.draws) raw += to_json(d).dump() + "\n";
  write_file(path, gzip_compress(raw));
}

ChainArchive read_archive(const std::string& path) {
  std::string raw = gzip_decompress(read_file(path));
  std::istringstream in(raw);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty archive: " + path);
  json header = json::parse(line);
  if (header.value("format", "") != "htrpm-archive") {
    throw std::invalid_argument("not a chain archive: " + path);
  }
  ChainArchive a;
  a.n_participants = header.at("n_participants").get<int>();
  a.n_periods = header.at("n_periods").get<int>();
  a.q = header.at("q").get<int>();
  a.d_z = header.at("d_z").get<int>();
  a.d_x = header.at("d_x").get<int>();
  a.variant = variant_from_name(header.at("variant").get<std::string>());
  a.seed = header.at("seed").get<std::uint64_t>();
  a.fingerprint = header.at("fingerprint").get<std::string>();
  a.iterations = header.at("iterations").get<int>();
  a.burnin = header.at("burnin").get<int>();
  a.thinning = header.at("thinning").get<int>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    a.draws.push_back(draw_from_json(json::parse(line)));
  }
  if (a.draws.size() != header.at("n_draws").get<std::size_t>()) {
    throw std::invalid_argument("truncated archive: " + path);
  }
  return a;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.resize(cut);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key=value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

void apply_config(const std::map<std::string, std::string>& config,
                  Hyperparameters& hyper) {
  for (const auto& [key, value] : config) {
    try {
      if (key == "variant") hyper.variant = variant_from_name(value);
      else if (key == "q") hyper.q = std::stoi(value);
      else if (key == "alpha") hyper.alpha = std::stod(value);
      else if (key == "alpha0") hyper.alpha0 = std::stod(value);
      else if (key == "aux_dishes") hyper.aux_dishes = std::stoi(value);
      else if (key == "waic_fraction") hyper.waic_fraction = std::stod(value);
      else if (key == "iterations") hyper.mcmc.iterations = std::stoi(value);
      else if (key == "burnin") hyper.mcmc.burnin = std::stoi(value);
      else if (key == "thinning") hyper.mcmc.thinning = std::stoi(value);
      else if (key == "seed") hyper.mcmc.seed = std::stoull(value);
      else if (key == "checkpoint_every") hyper.mcmc.checkpoint_every = std::stoi(value);
      else throw std::invalid_argument("unknown config key: " + key);
    } catch (const std::invalid_argument& e) {
      if (std::string(e.what()).rfind("unknown config key", 0) == 0) throw;
      throw std::invalid_argument("config key '" + key + "': bad value '" + value + "'");
    }
  }
}

std::string config_fingerprint(const Hyperparameters& hyper, int n_participants,
                               int n_periods, int d_z, int d_x) {
  std::ostringstream canon;
  canon << "variant=" << variant_name(hyper.variant) << ";q=" << hyper.q
        << ";alpha=" << fmt_double(hyper.alpha) << ";alpha0=" << fmt_double(hyper.alpha0)
        << ";aux=" << hyper.aux_dishes << ";waic=" << fmt_double(hyper.waic_fraction)
        << ";iters=" << hyper.mcmc.iterations << ";burnin=" << hyper.mcmc.burnin
        << ";thin=" << hyper.mcmc.thinning << ";seed=" << hyper.mcmc.seed
        << ";n=" << n_participants << ";j=" << n_periods << ";dz=" << d_z
        << ";dx=" << d_x << ";sigma_theta=";
  for (int r = 0; r < hyper.sigma_theta.rows(); ++r)
    for (int c = 0; c < hyper.sigma_theta.cols(); ++c)
      canon << fmt_double(hyper.sigma_theta(r, c)) << ',';
  canon << ";mu_eta=";
  for (int r = 0; r < hyper.mu_eta.size(); ++r) canon << fmt_double(hyper.mu_eta[r]) << ',';
  canon << ";sigma_eta=";
  for (int r = 0; r < hyper.sigma_eta.rows(); ++r)
    for (int c = 0; c < hyper.sigma_eta.cols(); ++c)
      canon << fmt_double(hyper.sigma_eta(r, c)) << ',';

  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : canon.str()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string gzip_compress(const std::string& raw) {
  z_stream strm{};
  if (deflateInit2(&strm, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8,
                   Z_DEFAULT_STRATEGY) != Z_OK) {
    throw std::runtime_error("deflateInit2 failed");
  }
  gz_header hdr{};  // zero mtime, no name/comment: output depends only on input
  hdr.os = 3;
  deflateSetHeader(&strm, &hdr);

  std::string out;
  out.resize(deflateBound(&strm, static_cast<uLong>(raw.size())) + 32);
  strm.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(raw.data()));
  strm.avail_in = static_cast<uInt>(raw.size());
  strm.next_out = reinterpret_cast<Bytef*>(out.data());
  strm.avail_out = static_cast<uInt>(out.size());
  int rc = deflate(&strm, Z_FINISH);
  if (rc != Z_STREAM_END) {
    deflateEnd(&strm);
    throw std::runtime_error("deflate failed");
  }
  out.resize(strm.total_out);
  deflateEnd(&strm);
  return out;
}

std::string gzip_decompress(const std::string& compressed) {
  z_stream strm{};
  if (inflateInit2(&strm, 15 + 16) != Z_OK) throw std::runtime_error("inflateInit2 failed");
  std::string out;
  std::string chunk(1 << 16, '\0');
  strm.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
  strm.avail_in = static_cast<uInt>(compressed.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    strm.next_out = reinterpret_cast<Bytef*>(chunk.data());
    strm.avail_out = static_cast<uInt>(chunk.size());
    rc = inflate(&strm, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&strm);
      throw std::runtime_error("corrupt gzip stream");
    }
    out.append(chunk.data(), chunk.size() - strm.avail_out);
    if (rc == Z_OK && strm.avail_in == 0 && strm.avail_out != 0) {
      inflateEnd(&strm);
      throw std::runtime_error("truncated gzip stream");
    }
  }
  inflateEnd(&strm);
  return out;
}

}  // namespace htrpm
