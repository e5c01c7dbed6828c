#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ocsplab/assessor.hpp"
#include "ocsplab/error.hpp"
#include "ocsplab/pipeline.hpp"

namespace py = pybind11;
using namespace ocsplab;

namespace {

py::bytes to_py(const Bytes& b) { return py::bytes(reinterpret_cast<const char*>(b.data()), b.size()); }

Bytes from_py(const py::bytes& b) {
  const std::string s = b;
  return Bytes(s.begin(), s.end());
}

py::dict kv_to_dict(const std::string& text) {
  py::dict d;
  const KvRecord rec = KvRecord::parse(text);
  for (const auto& [k, v] : rec.entries()) d[py::str(k)] = v;
  return d;
}

py::dict summary_to_dict(const SurveySummary& s) {
  py::dict fields;
  for (const auto& [name, f] : s.fields) {
    py::dict e;
    e["count"] = f.count;
    e["undetermined"] = f.undetermined;
    e["percent"] = f.percent;
    fields[py::str(name)] = e;
  }
  py::dict out;
  out["total"] = s.total;
  out["fields"] = fields;
  return out;
}

py::dict grade_to_dict(const RiskAssessment& g) {
  py::dict d;
  d["grade"] = std::string(risk_grade_name(g.grade));
  d["triggers"] = g.triggers;
  d["uncertain"] = g.uncertain;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of ocsplab";

  static py::exception<Error> error_type(m, "OcspLabError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      err.attr("kind") = std::string(errc_name(e.code()));
      PyErr_SetObject(error_type.ptr(), err.ptr());
    }
  });

  m.def("digest", [](const std::string& spec, const py::bytes& data) { return to_py(digest(HashSpec::parse(spec), from_py(data))); },
        py::arg("spec"), py::arg("data"), "Digest under sha1, sha256, toyN or toyN-sha1.");
  m.def("expected_trials", &expected_trials, py::arg("hash_bits"));
  m.def("one_decimal_percent", &one_decimal_percent, py::arg("count"), py::arg("total"));

  m.def("canonical_request", [](const py::bytes& der) { return to_py(encode_ocsp_request(decode_ocsp_request(from_py(der)))); },
        py::arg("der"), "Decodes and re-encodes an OCSPRequest; raises on non-canonical input.");
  m.def("canonical_response", [](const py::bytes& der) { return to_py(encode_ocsp_response(decode_ocsp_response(from_py(der)))); },
        py::arg("der"));
  m.def("status_request",
        [](const std::string& hash, const std::string& serial, std::optional<py::bytes> nonce) {
          const PkiFixture fx = make_fixture(HashSpec::parse(hash));
          std::optional<Bytes> n;
          if (nonce) n = from_py(*nonce);
          return to_py(encode_ocsp_request(make_status_request(fx.ca.certificate, HashSpec::sha1(), SerialNumber::parse(serial), n)));
        },
        py::arg("hash") = "toy32", py::arg("serial") = "1", py::arg("nonce") = py::none(),
        "Status request for a serial of the built-in fixture CA.");

  m.def("run_demo",
        [](const std::string& hash, std::uint64_t seed, const std::string& countermeasure, const std::string& kind,
           const std::string& signer, unsigned workers, std::optional<std::filesystem::path> out_dir) {
          DemoOptions o;
          o.hash = HashSpec::parse(hash);
          o.seed = seed;
          o.countermeasure = parse_countermeasure(countermeasure);
          o.kind = parse_content_kind(kind);
          o.signer = parse_signer_role(signer);
          o.workers = workers;
          o.out_dir = std::move(out_dir);
          DemoResult r;
          {
            py::gil_scoped_release release;
            r = run_demo(o);
          }
          return kv_to_dict(r.report());
        },
        py::arg("hash") = "toy32", py::arg("seed") = 1, py::arg("countermeasure") = "none",
        py::arg("kind") = "response", py::arg("signer") = "dedicated", py::arg("workers") = 1,
        py::arg("out_dir") = py::none(), "Full in-process attack; returns the run report as a dict.");

  m.def("audit_mock",
        [](const std::string& mode, const std::string& nonce_policy, const std::string& nonexistent,
           const std::string& signer, const std::string& hash, int probe_budget) {
          const HashSpec h = HashSpec::parse(hash);
          const PkiFixture fx = make_fixture(h);
          ResponderConfig cfg = ResponderConfig::for_fixture(fx, parse_signer_role(signer), h);
          cfg.mode = parse_responder_mode(mode);
          cfg.nonce_policy = parse_nonce_policy(nonce_policy);
          cfg.nonexistent_serial_policy = parse_nonexistent_policy(nonexistent);
          auto db = std::make_shared<StatusDatabase>();
          for (std::uint64_t s = 1; s <= 20; ++s) db->register_certificate(SerialNumber(s), CertStatus::good());
          ManualClock clock(demo_start(1));
          Responder responder(cfg, db, clock);
          InProcessTransport transport(responder, clock, demo_latency(1));
          AuditOptions ao;
          ao.probe_budget = probe_budget;
          return serialize_report(audit(transport, fx.ca.certificate, SerialNumber(5), ao));
        },
        py::arg("mode") = "realtime", py::arg("nonce_policy") = "mirror", py::arg("nonexistent") = "unknown",
        py::arg("signer") = "dedicated", py::arg("hash") = "toy32", py::arg("probe_budget") = audit_battery_size,
        "Audits a mock responder with the given configuration; returns the report record text.");

  m.def("parse_report", [](const std::string& text) { return kv_to_dict(serialize_report(parse_report(text))); },
        py::arg("text"), "Validates a report record and returns its fields.");
  m.def("risk_grade", [](const std::string& text) { return grade_to_dict(risk_grade(parse_report(text))); },
        py::arg("text"));
  m.def("aggregate_texts",
        [](const std::vector<std::string>& texts) {
          std::vector<AuditReport> reports;
          for (const auto& t : texts) reports.push_back(parse_report(t));
          return summary_to_dict(aggregate(reports));
        },
        py::arg("texts"));
  m.def("aggregate_dir", [](const std::filesystem::path& dir) { return summary_to_dict(aggregate(load_reports(dir))); },
        py::arg("dir"));
}
