#pragma once

namespace wavecone {

/// Every data-parallel kernel has a serial reference path; both reduce in
/// index order and return identical results.
enum class Execution { serial, parallel };

}  // namespace wavecone
