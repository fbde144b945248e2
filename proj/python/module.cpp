#include "acp/a3ap/signing.hpp"
#include "acp/adp/catalog.hpp"
#include "acp/aip/transcript_check.hpp"
#include "acp/arp/anchor_log.hpp"
#include "acp/core/error.hpp"
#include "acp/harness/replay.hpp"
#include "acp/harness/scenario.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using acp::core::Value;

namespace {

// Values cross the boundary as JSON text through Python's json module.
py::object to_py(const Value& v) { return py::module_::import("json").attr("loads")(v.dump()); }

Value from_py(const py::handle& obj) {
  auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return acp::core::canonical_decode(text);
}

acp::a3ap::KeyPair key_pair(const std::string& seed_hex) {
  auto bytes = acp::core::from_hex(seed_hex);
  if (bytes.size() != 32) throw acp::Error(acp::Errc::ParseError, "seed must be 32 bytes");
  acp::a3ap::Seed seed;
  std::copy(bytes.begin(), bytes.end(), seed.begin());
  return acp::a3ap::KeyPair::from_seed(seed);
}

std::vector<acp::core::Envelope> envelopes(const py::handle& list) {
  std::vector<acp::core::Envelope> out;
  for (const auto& item : from_py(list)) out.push_back(acp::core::Envelope::from_value(item));
  return out;
}

}  // namespace

PYBIND11_MODULE(_acp, m) {
  m.doc() = "Agent collaboration protocols: scenario runs, replay and protocol checks.";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const acp::Error& e) {
      auto cls = py::module_::import("acp.errors").attr("AcpError");
      auto err = cls(std::string(acp::to_string(e.code())), e.detail(), to_py(e.data()));
      PyErr_SetObject(cls.ptr(), err.ptr());
    }
  });

  m.def(
      "run_scenario",
      [](const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::string> transport) {
        auto cfg = acp::harness::ScenarioConfig::load(path);
        if (seed) cfg.seed = *seed;
        acp::harness::RunOptions opts;
        opts.transport = transport;
        if (transport == "socket") opts.max_wall = std::chrono::seconds(30);
        acp::harness::Transcript t;
        {
          py::gil_scoped_release release;
          t = acp::harness::run(cfg, opts);
        }
        return to_py(t.to_value());
      },
      py::arg("path"), py::arg("seed") = py::none(), py::arg("transport") = py::none(),
      "Runs a scenario config and returns its transcript.");

  m.def(
      "replay", [](const py::handle& transcript) {
        auto t = acp::harness::Transcript::from_value(from_py(transcript));
        return to_py(acp::harness::replay(t).to_value());
      },
      py::arg("transcript"), "Re-validates a transcript and returns the verdict.");

  m.def(
      "replay_file", [](const std::string& path) { return to_py(acp::harness::replay_file(path).to_value()); },
      py::arg("path"));

  m.def(
      "match_score",
      [](const py::handle& query, const py::handle& descriptor) {
        return acp::adp::match_score(acp::adp::Query::from_value(from_py(query)),
                                     acp::core::CapabilityDescriptor::from_value(from_py(descriptor)));
      },
      py::arg("query"), py::arg("descriptor"));

  m.def(
      "discover",
      [](const py::handle& descriptors, const py::handle& query) {
        std::vector<acp::adp::CatalogEntry> entries;
        for (const auto& d : from_py(descriptors)) {
          acp::adp::CatalogEntry e;
          e.descriptor = acp::core::CapabilityDescriptor::from_value(d);
          e.agent = e.descriptor.agent;
          e.as_of_version = e.descriptor.version;
          entries.push_back(std::move(e));
        }
        Value out = Value::array();
        for (const auto& r : acp::adp::discover(entries, acp::adp::Query::from_value(from_py(query))))
          out.push_back(r.to_value());
        return to_py(out);
      },
      py::arg("descriptors"), py::arg("query"), "Ranks descriptors against a query.");

  m.def(
      "verify_anchor",
      [](const py::handle& entries) {
        return acp::arp::verify_anchor(acp::arp::AnchorLog::from_value(from_py(entries)));
      },
      py::arg("entries"));

  m.def(
      "public_key", [](const std::string& seed_hex) { return acp::a3ap::to_hex(key_pair(seed_hex).public_key()); },
      py::arg("seed_hex"));

  m.def(
      "sign_envelope",
      [](const py::handle& envelope, const std::string& seed_hex) {
        auto env = acp::core::Envelope::from_value(from_py(envelope));
        return to_py(acp::a3ap::sign_envelope(std::move(env), key_pair(seed_hex)).to_value());
      },
      py::arg("envelope"), py::arg("seed_hex"));

  m.def(
      "verify_envelope",
      [](const py::handle& envelope, const std::string& public_key_hex) {
        auto env = acp::core::Envelope::from_value(from_py(envelope));
        return acp::a3ap::verify_envelope(env, acp::a3ap::public_key_from_hex(public_key_hex));
      },
      py::arg("envelope"), py::arg("public_key_hex"));

  m.def(
      "check_message_order",
      [](const py::handle& messages) {
        auto list = envelopes(messages);
        return to_py(acp::aip::check_message_order(list).to_value());
      },
      py::arg("messages"), "Checks task-protocol messages for ordering violations.");

  m.def(
      "canonical_encode", [](const py::handle& value) { return acp::core::canonical_encode(from_py(value)); },
      py::arg("value"));
}
