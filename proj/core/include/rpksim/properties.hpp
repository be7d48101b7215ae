#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpksim/bytes.hpp"
#include "rpksim/trace.hpp"

namespace rpksim::properties {

class MalformedTrace : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Indices below are positions in the checked trace (0-based).
struct Verdict {
  std::string query_name;
  bool satisfied = true;
  std::optional<std::size_t> witness;
  // Events the witness could have been paired with.
  std::vector<std::size_t> candidates;
  // CompromiseDomain event that excused at least one otherwise unmatched event.
  std::optional<std::size_t> exception_used;
  std::vector<std::string> notes;
};

struct CheckOptions {
  // Honour the "|| CompromiseDomain(...)" disjuncts.
  bool allow_compromise_exception = true;
};

// Everything the network adversary ended up holding.
struct AdversaryKnowledge {
  std::vector<Bytes> items;

  void learn(Bytes item) { items.push_back(std::move(item)); }
  // Exact item or embedded anywhere inside one.
  bool knows(ByteView secret) const;
};

// Throws MalformedTrace on non-increasing sequence numbers or events missing
// the parameters their kind requires.
void validate_trace(const Trace& trace);

// ClientFinished(s, spk, ms) ==> inj-event ServerFinished(s, spk, ms)
//                                 || CompromiseDomain(s)
// Injectivity is checked as a maximum bipartite matching that must saturate
// the (non-excused) ClientFinished side.
Verdict check_server_auth(const Trace& trace, const CheckOptions& options = {});

// ServerComplete(s, c, spk, cpk, ms) ==> ClientFinished(s, c, spk, cpk, ms)
//                                         || CompromiseDomain(s) || CompromiseDomain(c)
Verdict check_client_auth(const Trace& trace, const CheckOptions& options = {});

// No master secret of a session between uncompromised parties is known to
// the adversary.
Verdict check_secrecy(const Trace& trace, const AdversaryKnowledge& knowledge);

}  // namespace rpksim::properties
