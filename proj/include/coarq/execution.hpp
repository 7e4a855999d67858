#pragma once

namespace coarq {

/// How data-parallel kernels run. Both give identical results; the serial path is
/// the reference the parallel one is tested against.
enum class Execution { serial, parallel };

}  // namespace coarq
