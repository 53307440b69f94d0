#include "grlol/errors.hpp"

namespace grlol {

std::string_view errc_name(Errc code) noexcept
{
    switch (code) {
    case Errc::invalid_input: return "InvalidInput";
    case Errc::zero_column: return "ZeroColumn";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::empty_set: return "EmptySet";
    case Errc::bad_group_count: return "BadGroupCount";
    case Errc::orthogonal_design: return "OrthogonalDesign";
    case Errc::no_feasible_leader: return "NoFeasibleLeader";
    case Errc::invalid_constants: return "InvalidConstants";
    case Errc::singular_gram: return "SingularGram";
    case Errc::a3_violated: return "A3Violated";
    case Errc::not_admissible: return "NotAdmissible";
    case Errc::not_subset_of_leaders: return "NotSubsetOfLeaders";
    case Errc::zero_signal: return "ZeroSignal";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::io_error: return "IoError";
    }
    return "Unknown";
}

} // namespace grlol
