#pragma once

#include <iosfwd>
#include <string>

#include "osklad/osklad.hpp"

namespace osklad {

/// Model files are line-oriented `key values...` text, first line `osklad-model 1`.
/// Every real is written as a C99 hex float, so a write/read round trip is bit-exact.
/// Gram matrices are not stored; they are rebuilt from the coordinates and masks.
///
///   osklad-model 1
///   variant linear|ekfs
///   kernel linear|rbf
///   bandwidth <real>
///   budget <int>            C <real>            kkt_tol <real>     max_passes <int>
///   outer_tol <real>        max_outer <int>     master_tol <real>      master_max_iter <int>
///   eigen_floor <real>
///   basis <n> <M>           followed by n rows      (ekfs only)
///   transform <r> <n>       followed by r rows      (ekfs only)
///   coords <N> <D>          followed by N rows
///   masks <p> <D>           followed by p rows of selected indices
///   mu <p reals>
///   alpha <N reals>
///   radius_sq <real>
///   end
///
/// Scalar keys each sit on their own line, in the order above.
void write_model(const OskladModel& model, std::ostream& out);
OskladModel read_model(std::istream& in);

void save_model(const OskladModel& model, const std::string& path);
OskladModel load_model(const std::string& path);

std::string format_real(double v);

}  // namespace osklad
