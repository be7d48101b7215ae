#include "rpksim/netsim.hpp"

#include <sstream>

#include "rpksim/messages.hpp"

namespace rpksim::netsim {

namespace {

std::string describe_match(const Match& m) {
  std::string out;
  auto add = [&](const std::string& part) {
    if (!out.empty()) out += ',';
    out += part;
  };
  if (m.src) add("src=" + m.src->value);
  if (m.dst) add("dst=" + m.dst->value);
  if (m.kind) add("kind=" + *m.kind);
  if (m.nth) add("nth=" + std::to_string(*m.nth));
  return out.empty() ? "*" : out;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string describe(const AdversaryAction& action) {
  return std::visit(Overloaded{
                        [](const RedirectName& a) { return "RedirectName(" + a.name + "->" + a.to.value + ")"; },
                        [](const RewriteSrc& a) {
                          return "RewriteSrc(" + a.match_src.value + "->" + a.new_src.value + ")";
                        },
                        [](const RewriteDst& a) {
                          return "RewriteDst(" + a.match_dst.value + "->" + a.new_dst.value + ")";
                        },
                        [](const Drop& a) { return "Drop(" + describe_match(a.match) + ")"; },
                        [](const Inject& a) { return "Inject(" + describe_match(a.trigger) + ")"; },
                        [](const Tamper& a) { return "Tamper(" + describe_match(a.match) + ")"; },
                        [](const Observe& a) { return "Observe(" + describe_match(a.match) + ")"; },
                    },
                    action);
}

std::string format_dump(const std::vector<DumpLine>& lines) {
  std::ostringstream out;
  for (const auto& l : lines) {
    out << (l.delivered ? std::to_string(l.seq) : std::string("-")) << ' ' << l.src.value << " -> " << l.dst.value
        << " conn=" << l.connection << ' ' << l.kind;
    if (!l.delivered) out << " (not delivered)";
    if (!l.applied.empty()) {
      out << " [";
      for (std::size_t i = 0; i < l.applied.size(); ++i) out << (i ? "; " : "") << l.applied[i];
      out << ']';
    }
    out << '\n';
  }
  return out.str();
}

void NetworkPort::send(const Address& dst, std::uint64_t connection, Bytes payload) {
  net_->send(Envelope{local_, dst, connection, std::move(payload), 0});
}

Address NetworkPort::resolve(const std::string& name) const { return net_->resolve(name); }

Network::Network(std::map<std::string, NameEntry> names, AdversaryScript script)
    : names_(std::move(names)), script_(std::move(script)), match_counts_(script_.actions.size(), 0) {
  for (const auto& action : script_.actions) {
    if (const auto* redirect = std::get_if<RedirectName>(&action)) {
      auto it = names_.find(redirect->name);
      if (it == names_.end()) throw NetError("RedirectName on undeclared name '" + redirect->name + "'");
      if (!it->second.adversary_controlled) {
        throw NetError("RedirectName on '" + redirect->name + "', which the adversary does not control");
      }
    }
  }
}

NetworkPort Network::attach(const Address& address, Handler handler) {
  handlers_[address] = std::move(handler);
  return NetworkPort(*this, address);
}

Address Network::resolve(const std::string& name) const {
  auto it = names_.find(name);
  if (it == names_.end()) throw NetError("cannot resolve undeclared name '" + name + "'");
  // The last redirect in the script wins.
  std::optional<Address> redirected;
  for (const auto& action : script_.actions) {
    if (const auto* r = std::get_if<RedirectName>(&action); r && r->name == name) redirected = r->to;
  }
  return redirected.value_or(it->second.address);
}

void Network::send(Envelope envelope) { queue_.push_back(std::move(envelope)); }

bool Network::matches(std::size_t action_index, const Match& match, const Envelope& env, const std::string& kind) {
  if (match.src && *match.src != env.src) return false;
  if (match.dst && *match.dst != env.dst) return false;
  if (match.kind && *match.kind != kind) return false;
  const auto hit = ++match_counts_[action_index];
  return !match.nth || *match.nth == hit;
}

std::vector<Envelope> Network::apply_script(Envelope env, DumpLine& line) {
  observed_.push_back(env.payload);
  std::vector<Envelope> injected;
  for (std::size_t i = 0; i < script_.actions.size(); ++i) {
    const auto& action = script_.actions[i];
    const std::string kind = messages::describe_payload(env.payload);
    if (const auto* a = std::get_if<RewriteSrc>(&action)) {
      if (env.src == a->match_src) {
        env.src = a->new_src;
        line.applied.push_back(describe(action));
      }
    } else if (const auto* a = std::get_if<RewriteDst>(&action)) {
      if (env.dst == a->match_dst) {
        env.dst = a->new_dst;
        line.applied.push_back(describe(action));
      }
    } else if (const auto* a = std::get_if<Drop>(&action)) {
      if (matches(i, a->match, env, kind)) {
        line.applied.push_back(describe(action));
        line.delivered = false;
        return {};
      }
    } else if (const auto* a = std::get_if<Tamper>(&action)) {
      if (matches(i, a->match, env, kind) && !env.payload.empty()) {
        env.payload.back() ^= 0x01;
        line.applied.push_back(describe(action));
      }
    } else if (const auto* a = std::get_if<Inject>(&action)) {
      if (matches(i, a->trigger, env, kind)) {
        injected.push_back(a->envelope);
        line.applied.push_back(describe(action));
      }
    } else if (const auto* a = std::get_if<Observe>(&action)) {
      if (matches(i, a->match, env, kind)) {
        observe_log_.push_back(env);
        line.applied.push_back(describe(action));
      }
    }
    // RedirectName acts in resolve(), not on envelopes.
  }
  std::vector<Envelope> out;
  out.push_back(std::move(env));
  for (auto& e : injected) out.push_back(std::move(e));
  return out;
}

std::vector<Envelope> Network::deliver(Envelope envelope) {
  DumpLine scratch;
  return apply_script(std::move(envelope), scratch);
}

std::size_t Network::run(std::size_t max_steps) {
  std::size_t steps = 0;
  while (!queue_.empty() && steps < max_steps) {
    Envelope env = std::move(queue_.front());
    queue_.pop_front();
    DumpLine line;
    line.src = env.src;
    line.dst = env.dst;
    line.connection = env.connection;
    line.kind = messages::describe_payload(env.payload);
    line.payload = env.payload;
    auto out = apply_script(std::move(env), line);
    if (out.empty()) {
      dump_.push_back(std::move(line));
      continue;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
      Envelope& e = out[i];
      e.seq = next_seq_++;
      DumpLine l = i == 0 ? line : DumpLine{};
      l.seq = e.seq;
      l.src = e.src;
      l.dst = e.dst;
      l.connection = e.connection;
      l.kind = messages::describe_payload(e.payload);
      l.payload = e.payload;
      if (i > 0) {
        l.applied.push_back("injected");
        observed_.push_back(e.payload);
      }
      auto handler = handlers_.find(e.dst);
      if (handler == handlers_.end()) {
        l.delivered = false;
        l.applied.push_back("unroutable");
        dump_.push_back(std::move(l));
        continue;
      }
      dump_.push_back(std::move(l));
      ++steps;
      handler->second(e);
    }
  }
  return steps;
}

}  // namespace rpksim::netsim
