#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "shortcut/config.hpp"
#include "shortcut/trace.hpp"

namespace shortcut {

/// Writes to `<path>.tmp` and renames over `path` on commit(), so readers
/// never observe a partial file. An uncommitted file is removed on
/// destruction. Errors are std::runtime_error naming the path.
class AtomicOutput {
 public:
  explicit AtomicOutput(std::string path);
  ~AtomicOutput();
  AtomicOutput(const AtomicOutput&) = delete;
  AtomicOutput& operator=(const AtomicOutput&) = delete;

  [[nodiscard]] std::ofstream& stream() { return out_; }
  void commit();

 private:
  std::string path_;
  std::string tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

void write_file_atomic(const std::string& path, const std::string& content);

/// 17 significant digits, which parse back to the identical double.
[[nodiscard]] std::string format_double(double value);

/// `seq,group,step,provenance,src,rejected,w,evals_cum,c0..c{d-1}`; the
/// deduplicated form keeps only computed rows and appends `multiplicity`,
/// the number of full-mode rows holding that row's state.
[[nodiscard]] std::string trace_csv_header(std::size_t dimension, TraceMode mode);

void emit_trace(const Trace& trace, const std::string& path, TraceMode mode);

/// Streams full-mode rows as a run produces them. The file appears at
/// `path` only after finish().
class TraceCsvWriter final : public TraceObserver {
 public:
  TraceCsvWriter(const std::string& path, std::size_t dimension);
  void on_record(const TraceRecord& record) override;
  void finish();

 private:
  AtomicOutput file_;
  std::uint64_t evaluations_ = 0;
};

struct CsvTrace {
  std::vector<TraceRecord> records;
  std::vector<std::uint64_t> evals_cum;
  std::vector<std::uint64_t> multiplicity;  // all 1 for full-mode files
};

/// Parses either mode back; used for round-trip checks.
[[nodiscard]] CsvTrace read_trace_csv(const std::string& path);

}  // namespace shortcut
