#include "shortcut/trace_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <sstream>
#include <stdexcept>

namespace shortcut {

namespace {

std::runtime_error io_error(const std::string& what, const std::string& path) {
  return std::runtime_error(what + " '" + path + "': " + std::strerror(errno));
}

void write_row(std::ostream& out, const TraceRecord& r, std::uint64_t evals_cum) {
  out << r.sequence << ',' << r.group << ',' << r.step << ','
      << (r.provenance == Provenance::computed ? 'C' : 'P') << ',';
  if (r.provenance == Provenance::copied) out << r.source;
  out << ',' << (r.rejected ? 1 : 0) << ',' << format_double(r.w) << ',' << evals_cum;
  for (double c : r.state) out << ',' << format_double(c);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

AtomicOutput::AtomicOutput(std::string path)
    : path_(std::move(path)), tmp_(path_ + ".tmp") {
  const auto parent = std::filesystem::path(path_).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
    if (ec) throw std::runtime_error("cannot create directory '" + parent.string() + "': " + ec.message());
  }
  out_.open(tmp_, std::ios::out | std::ios::trunc | std::ios::binary);
  if (!out_) throw io_error("cannot open for writing", tmp_);
}

AtomicOutput::~AtomicOutput() {
  if (!committed_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(tmp_, ec);
  }
}

void AtomicOutput::commit() {
  out_.flush();
  if (!out_) throw io_error("write failed for", tmp_);
  out_.close();
  std::error_code ec;
  std::filesystem::rename(tmp_, path_, ec);
  if (ec) throw std::runtime_error("cannot rename '" + tmp_ + "' to '" + path_ + "': " + ec.message());
  committed_ = true;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  AtomicOutput file(path);
  file.stream() << content;
  file.commit();
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string trace_csv_header(std::size_t dimension, TraceMode mode) {
  std::string h = "seq,group,step,provenance,src,rejected,w,evals_cum";
  for (std::size_t i = 0; i < dimension; ++i) h += ",c" + std::to_string(i);
  if (mode == TraceMode::deduplicated) h += ",multiplicity";
  return h;
}

void emit_trace(const Trace& trace, const std::string& path, TraceMode mode) {
  const auto& rows = trace.records;
  const std::size_t dim = rows.empty() ? 0 : rows.front().state.size();

  std::vector<std::uint64_t> multiplicity;
  if (mode == TraceMode::deduplicated) {
    multiplicity.assign(rows.size(), 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::size_t j = i;
      while (rows[j].provenance == Provenance::copied) {
        if (rows[j].source >= j) {
          throw std::invalid_argument("trace row " + std::to_string(j) +
                                      " copies a later row");
        }
        j = rows[j].source;
      }
      ++multiplicity[j];
    }
  }

  AtomicOutput file(path);
  auto& out = file.stream();
  out << trace_csv_header(dim, mode) << '\n';
  std::uint64_t evals = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.provenance == Provenance::computed) ++evals;
    if (mode == TraceMode::deduplicated) {
      if (r.provenance == Provenance::copied) continue;
      write_row(out, r, evals);
      out << ',' << multiplicity[i] << '\n';
    } else {
      write_row(out, r, evals);
      out << '\n';
    }
  }
  file.commit();
}

TraceCsvWriter::TraceCsvWriter(const std::string& path, std::size_t dimension)
    : file_(path) {
  file_.stream() << trace_csv_header(dimension, TraceMode::full) << '\n';
}

void TraceCsvWriter::on_record(const TraceRecord& record) {
  if (record.provenance == Provenance::computed) ++evaluations_;
  write_row(file_.stream(), record, evaluations_);
  file_.stream() << '\n';
}

void TraceCsvWriter::finish() { file_.commit(); }

CsvTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open trace", path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trace file '" + path + "'");
  const auto header = split(line);
  const bool dedup = !header.empty() && header.back() == "multiplicity";
  const std::size_t fixed = 8;
  const std::size_t dim = header.size() - fixed - (dedup ? 1 : 0);

  CsvTrace out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = split(line);
    if (f.size() != header.size()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " fields");
    }
    TraceRecord r;
    r.sequence = std::stoull(f[0]);
    r.group = std::stoull(f[1]);
    r.step = std::stoull(f[2]);
    r.provenance = f[3] == "P" ? Provenance::copied : Provenance::computed;
    if (!f[4].empty()) r.source = std::stoull(f[4]);
    r.rejected = f[5] == "1";
    r.w = std::strtod(f[6].c_str(), nullptr);
    out.evals_cum.push_back(std::stoull(f[7]));
    r.state.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) r.state[i] = std::strtod(f[fixed + i].c_str(), nullptr);
    out.multiplicity.push_back(dedup ? std::stoull(f.back()) : 1);
    out.records.push_back(std::move(r));
  }
  return out;
}

}  // namespace shortcut
