#include "qet/wp.hpp"

namespace qet {

const char* wp_status_name(WpStatus s) {
  switch (s) {
    case WpStatus::Exact: return "Exact";
    case WpStatus::ConvergedLowerBound: return "ConvergedLowerBound";
    case WpStatus::IterationCapLowerBound: return "IterationCapLowerBound";
    case WpStatus::Divergent: return "Divergent";
  }
  return "?";
}

}  // namespace qet
