#pragma once

// Standing repo facility draw: the Fed lends reserves against Treasuries.

#include <cstdint>
#include <stdexcept>

#include "parsim/analytics.hpp"
#include "parsim/ledger.hpp"

namespace parsim {

struct DealerProfile;

enum class SrfErrc : std::uint8_t { Disabled, SlrBound, InsufficientCollateral };

class SrfError : public std::runtime_error {
 public:
  SrfError(SrfErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  SrfErrc code() const { return code_; }

 private:
  SrfErrc code_;
};

/// Grows the dealer's reserves and its SRF liability by `amount`, pledging
/// Treasuries to the Fed. The borrow grows dealer assets, so it needs SLR
/// headroom of at least `amount`.
void srf_leg(LedgerWorld& world, const DealerProfile& dealer, Amount amount, bool enabled, const SlrParams& slr);

}  // namespace parsim
