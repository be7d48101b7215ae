#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rpksim/bytes.hpp"

namespace rpksim::netsim {

struct Address {
  std::string value;
  friend bool operator==(const Address&, const Address&) = default;
  friend auto operator<=>(const Address&, const Address&) = default;
};

struct Envelope {
  Address src;
  Address dst;
  // Stands in for the transport port pair: picked by the client, echoed by
  // the server, never rewritten by the adversary actions below.
  std::uint64_t connection = 0;
  Bytes payload;
  std::uint64_t seq = 0;  // assigned on delivery
};

// Selects envelopes for Drop / Inject / Tamper / Observe. Unset fields match
// anything; `kind` compares against describe_payload(); `nth` restricts the
// action to the nth (1-based) envelope that matched the other fields.
struct Match {
  std::optional<Address> src;
  std::optional<Address> dst;
  std::optional<std::string> kind;
  std::optional<std::uint32_t> nth;
};

struct RedirectName {
  std::string name;
  Address to;
};
struct RewriteSrc {
  Address match_src;
  Address new_src;
};
struct RewriteDst {
  Address match_dst;
  Address new_dst;
};
struct Drop {
  Match match;
};
// Queues `envelope` right after the triggering envelope is delivered.
struct Inject {
  Match trigger;
  Envelope envelope;
};
// Flips the low bit of the last payload octet.
struct Tamper {
  Match match;
};
struct Observe {
  Match match;
};

using AdversaryAction = std::variant<RedirectName, RewriteSrc, RewriteDst, Drop, Inject, Tamper, Observe>;

std::string describe(const AdversaryAction& action);

struct AdversaryScript {
  std::vector<AdversaryAction> actions;
  bool empty() const noexcept { return actions.empty(); }
};

struct NameEntry {
  Address address;
  bool adversary_controlled = false;
};

class NetError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DumpLine {
  std::uint64_t seq = 0;
  Address src;
  Address dst;
  std::uint64_t connection = 0;
  std::string kind;
  std::vector<std::string> applied;
  bool delivered = true;
  Bytes payload;  // as it left the adversary
};

std::string format_dump(const std::vector<DumpLine>& lines);

class Network;

// Endpoint-facing handle bound to one local address.
class NetworkPort {
 public:
  NetworkPort(Network& net, Address local) : net_(&net), local_(std::move(local)) {}

  const Address& local() const noexcept { return local_; }
  void send(const Address& dst, std::uint64_t connection, Bytes payload);
  Address resolve(const std::string& name) const;

 private:
  Network* net_;
  Address local_;
};

// Single-threaded deterministic network. Envelopes are delivered in FIFO
// order; the adversary script is applied to each one on the way.
class Network {
 public:
  using Handler = std::function<void(const Envelope&)>;

  // Throws NetError when the script redirects a name the adversary does not
  // control or names an undeclared one.
  Network(std::map<std::string, NameEntry> names, AdversaryScript script);

  NetworkPort attach(const Address& address, Handler handler);

  // Honest mapping unless a RedirectName applies. Throws NetError for
  // undeclared names.
  Address resolve(const std::string& name) const;

  void send(Envelope envelope);

  // Applies the script to one envelope and returns what reaches the wire
  // (zero, one, or more envelopes, before sequence numbering).
  std::vector<Envelope> deliver(Envelope envelope);

  // Runs until no envelopes remain or `max_steps` deliveries happened.
  // Returns the number of deliveries.
  std::size_t run(std::size_t max_steps = 100000);

  const std::vector<DumpLine>& dump() const noexcept { return dump_; }
  // Every payload the adversary saw on the wire.
  const std::vector<Bytes>& observed_payloads() const noexcept { return observed_; }
  const std::vector<Envelope>& observe_log() const noexcept { return observe_log_; }

 private:
  bool matches(std::size_t action_index, const Match& match, const Envelope& env, const std::string& kind);
  std::vector<Envelope> apply_script(Envelope envelope, DumpLine& line);

  std::map<std::string, NameEntry> names_;
  AdversaryScript script_;
  std::map<Address, Handler> handlers_;
  std::deque<Envelope> queue_;
  std::vector<DumpLine> dump_;
  std::vector<Bytes> observed_;
  std::vector<Envelope> observe_log_;
  std::vector<std::uint32_t> match_counts_;
  std::uint64_t next_seq_ = 1;
};

}  // namespace rpksim::netsim
