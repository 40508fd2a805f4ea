#include "quadinv/trace.hpp"

#include <cmath>

#include "quadinv/error.hpp"

namespace quadinv {

void Trace::append(TraceRecord record) {
  if (!records_.empty() && record.iter <= records_.back().iter) {
    throw PreconditionError("trace iter must be strictly increasing (got " + std::to_string(record.iter) +
                            " after " + std::to_string(records_.back().iter) + ")");
  }
  if (!std::isfinite(record.loss) || record.loss < 0.0) {
    throw PreconditionError("trace loss must be finite and non-negative");
  }
  if (record.err_fro && (!std::isfinite(*record.err_fro) || *record.err_fro < 0.0)) {
    throw PreconditionError("trace err_fro must be finite and non-negative");
  }
  records_.push_back(std::move(record));
}

} // namespace quadinv
