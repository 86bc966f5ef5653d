#include "shortcut/trace.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "shortcut/metropolis.hpp"

namespace shortcut {

void TraceCollector::on_record(const TraceRecord& record) {
  if (record.provenance == Provenance::computed) ++trace_.evaluations;
  trace_.records.push_back(record);
}

void TraceCollector::on_sequence_end(const SequenceSummary& summary) {
  trace_.sequences.push_back(summary);
}

ChainCursor ChainCursor::start(const Target& target, StateVector x0,
                               TraceObserver& observer) {
  ChainCursor cursor;
  cursor.state = snap_to_lattice(std::move(x0));
  cursor.log_density = target.log_density(cursor.state);
  if (!(cursor.log_density > -INFINITY)) {
    throw std::invalid_argument("initial state has zero density under target '" +
                                target.name() + "'");
  }
  TraceRecord row0;
  row0.state = cursor.state;
  row0.log_density = cursor.log_density;
  observer.on_record(row0);
  return cursor;
}

}  // namespace shortcut
