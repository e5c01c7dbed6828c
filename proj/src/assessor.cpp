#include "ocsplab/assessor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "ocsplab/error.hpp"
#include "ocsplab/pki.hpp"
#include "ocsplab/textio.hpp"

namespace ocsplab {

namespace {

using namespace std::chrono_literals;

/// Signature algorithms of deployed PKIs that hash with SHA-1.
constexpr std::string_view sha1_signature_oids[] = {
    "1.2.840.113549.1.1.5",  // sha1WithRSAEncryption
    "1.2.840.10045.4.1",     // ecdsa-with-SHA1
    "1.2.840.10040.4.3",     // dsa-with-sha1
};

std::optional<bool> and3(std::optional<bool> a, std::optional<bool> b) {
  if (a == false || b == false) return false;
  if (a && b) return true;
  return std::nullopt;
}

std::string tri(const std::optional<bool>& v) { return v ? (*v ? "true" : "false") : "undetermined"; }

std::optional<bool> parse_tri(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  if (s == "undetermined") return std::nullopt;
  throw Error(Errc::malformed_record, "expected true/false/undetermined, got '" + s + "'");
}

struct Parsed {
  bool ok = false;
  BasicOcspResponse basic;
  ResponseStatus status = ResponseStatus::successful;
};

Parsed parse_exchange(const ProbeTranscript& t) {
  Parsed p;
  if (t.aborted) return p;
  try {
    const OcspResponse outer = decode_ocsp_response(t.response);
    p.status = outer.status;
    if (outer.status != ResponseStatus::successful) return p;
    p.basic = decode_basic_ocsp_response(outer.basic_response);
    p.ok = !p.basic.tbs.responses.empty();
  } catch (const Error&) {
    p.ok = false;
  }
  return p;
}

Bytes certificate_der(const Certificate& c) { return frame_certificate(c.tbs_raw, c.signature_algorithm, c.signature); }

}  // namespace

std::optional<bool> AuditReport::scaling_exposed() const {
  std::optional<bool> by_serial;
  if (nonexistent_behavior) {
    by_serial = *nonexistent_behavior == NonexistentBehavior::unknown || *nonexistent_behavior == NonexistentBehavior::good;
  }
  if (nonce_mirrored == true || by_serial == true) return true;
  if (nonce_mirrored == false && by_serial == false) return false;
  return std::nullopt;
}

bool AuditReport::hash_disagreement() const {
  return hash_algorithm && cert_id_hash_algorithm && *hash_algorithm != *cert_id_hash_algorithm;
}

AuditReport audit(Transport& transport, const Certificate& issuer, const SerialNumber& known_serial,
                  const AuditOptions& options) {
  AuditReport r;
  r.endpoint = transport.endpoint();
  RandomSource rng(options.seed);
  Clock& clock = transport.clock();
  const int budget = std::max(0, options.probe_budget);
  r.partial = budget < audit_battery_size;

  auto probe = [&](std::string label, const SerialNumber& serial, std::optional<Bytes> nonce) {
    ProbeTranscript t;
    t.label = std::move(label);
    t.request = encode_ocsp_request(make_status_request(issuer, options.cert_id_hash, serial, nonce));
    const Exchange ex = transport.exchange(t.request);
    t.sent_at = ex.sent_at;
    t.received_at = ex.received_at;
    t.aborted = ex.aborted;
    t.http_status = ex.http_status;
    t.response = ex.response;
    r.transcripts.push_back(std::move(t));
    return parse_exchange(r.transcripts.back());
  };

  std::vector<Parsed> parsed;
  std::optional<Bytes> sent_nonce;
  for (int i = 0; i < budget && i < audit_battery_size; ++i) {
    switch (i) {
      case 0: parsed.push_back(probe("baseline", known_serial, std::nullopt)); break;
      case 1:
        clock.sleep_until(r.transcripts[0].sent_at + options.realtime_gap);
        parsed.push_back(probe("repeat", known_serial, std::nullopt));
        break;
      case 2:
        sent_nonce = rng.bytes(options.nonce_length);
        parsed.push_back(probe("nonce", known_serial, sent_nonce));
        break;
      case 3: parsed.push_back(probe("nonexistent", options.nonexistent_serial, std::nullopt)); break;
      case 4: parsed.push_back(probe("nonexistent-repeat", options.second_nonexistent_serial, std::nullopt)); break;
    }
  }
  auto ok = [&](std::size_t i) { return i < parsed.size() && parsed[i].ok; };

  // Signer facts come from the first successful answer to a known serial.
  for (std::size_t i = 0; i < std::min<std::size_t>(parsed.size(), 3); ++i) {
    if (!ok(i)) continue;
    const BasicOcspResponse& b = parsed[i].basic;
    const std::string& sig_oid = b.signature_algorithm.oid;
    if (auto spec = HashSpec::from_signature_oid(sig_oid)) {
      r.hash_algorithm = spec->name();
      r.sha1_in_use = spec->sha1_class();
    } else {
      r.hash_algorithm = sig_oid;
      r.sha1_in_use = std::find(std::begin(sha1_signature_oids), std::end(sha1_signature_oids), sig_oid) !=
                      std::end(sha1_signature_oids);
    }
    r.cert_id_hash_algorithm = b.tbs.responses[0].cert_id.hash_algorithm.name();
    if (!b.certs.empty()) {
      r.ca_signed = b.certs.front() == certificate_der(issuer);
    } else if (b.tbs.responder_id.kind == ResponderId::Kind::by_key) {
      r.ca_signed = b.tbs.responder_id.value == responder_key_hash(issuer);
    } else {
      r.ca_signed = b.tbs.responder_id.value == encode_name(issuer.tbs.subject);
    }
    for (const char* f : {"hash_algorithm", "cert_id_hash_algorithm", "sha1_in_use", "ca_signed"}) r.evidence[f] = {i};
    break;
  }

  if (ok(0) && ok(1)) {
    r.realtime = parsed[0].basic.tbs.responses[0].this_update != parsed[1].basic.tbs.responses[0].this_update;
    r.evidence["realtime"] = {0, 1};
  }

  if (ok(2)) {
    r.nonce_mirrored = find_nonce(parsed[2].basic.tbs.extensions) == sent_nonce;
    r.evidence["nonce_mirrored"] = {2};
  }

  if (parsed.size() > 3) {
    const ProbeTranscript& t = r.transcripts[3];
    std::optional<NonexistentBehavior> behavior;
    if (t.aborted) {
      behavior = NonexistentBehavior::close_connection;
    } else if (!parsed[3].ok) {
      behavior = NonexistentBehavior::unauthorized;
    } else if (parsed[3].basic.tbs.responses[0].status.kind == CertStatusKind::good) {
      behavior = NonexistentBehavior::good;
    } else if (ok(4)) {
      auto tu = [&](std::size_t i) { return parsed[i].basic.tbs.responses[0].this_update.instant; };
      // A served thisUpdate should track either the cached value or the
      // clock, as seen on the baseline probe.
      auto off_track = [&](std::size_t i) {
        if (!ok(0)) return false;
        const Duration cached = tu(i) - tu(0);
        const Duration live = cached - (r.transcripts[i].sent_at - r.transcripts[0].sent_at);
        return std::chrono::abs(cached) > 2s && std::chrono::abs(live) > 2s;
      };
      const bool randomized = std::chrono::abs(tu(3) - tu(4)) > 2s || off_track(3) || off_track(4);
      behavior = randomized ? NonexistentBehavior::randomized : NonexistentBehavior::unknown;
    }
    if (behavior) {
      r.nonexistent_behavior = behavior;
      r.good_for_nonexistent = *behavior == NonexistentBehavior::good;
      r.evidence["nonexistent_behavior"] = parsed.size() > 4 ? std::vector<std::size_t>{3, 4} : std::vector<std::size_t>{3};
      r.evidence["good_for_nonexistent"] = {3};
    } else if (parsed[3].ok) {
      r.good_for_nonexistent = false;
      r.evidence["good_for_nonexistent"] = {3};
    }
  }

  std::size_t observed = 0, fractional = 0;
  std::vector<std::size_t> cited;
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    if (!ok(i)) continue;
    cited.push_back(i);
    const auto& tbs = parsed[i].basic.tbs;
    std::vector<const der::GeneralizedTime*> times{&tbs.produced_at};
    for (const auto& s : tbs.responses) {
      times.push_back(&s.this_update);
      if (s.next_update) times.push_back(&*s.next_update);
    }
    for (const auto* t : times) {
      ++observed;
      fractional += t->instant.time_since_epoch().count() % 1000 != 0;
    }
  }
  if (observed > 0) {
    r.granularity = fractional * 20 <= observed ? GranularityEstimate::second : GranularityEstimate::millisecond;
    r.evidence["granularity"] = cited;
  }
  return r;
}

// ---- grading ------------------------------------------------------------

std::string_view risk_grade_name(RiskGrade g) {
  switch (g) {
    case RiskGrade::low: return "low";
    case RiskGrade::elevated: return "elevated";
    case RiskGrade::high: return "high";
    case RiskGrade::critical: return "critical";
  }
  return "?";
}

RiskAssessment risk_grade(const AuditReport& r) {
  RiskAssessment a;
  const auto scaling = r.scaling_exposed();
  if (r.ca_signed == true && scaling == true) {
    a.grade = RiskGrade::critical;
    a.triggers = {"ca_signed", "scaling_exposed"};
  } else if (r.sha1_in_use == true && scaling == true) {
    a.grade = RiskGrade::high;
    a.triggers = {"sha1_in_use", "scaling_exposed"};
  } else if (scaling == true && r.realtime == true) {
    a.grade = RiskGrade::elevated;
    a.triggers = {"scaling_exposed", "realtime"};
  }
  if (scaling == true) {
    if (r.nonce_mirrored == true) a.triggers.push_back("nonce_mirrored");
    if (r.nonexistent_behavior)
      a.triggers.push_back("nonexistent=" + std::string(nonexistent_behavior_name(*r.nonexistent_behavior)));
  }
  // A grade is uncertain when an undetermined fact could still raise it.
  const bool scaling_open = !scaling.has_value();
  switch (a.grade) {
    case RiskGrade::critical: break;
    case RiskGrade::high: a.uncertain = !r.ca_signed.has_value(); break;
    case RiskGrade::elevated: a.uncertain = !r.ca_signed.has_value() || !r.sha1_in_use.has_value(); break;
    case RiskGrade::low:
      a.uncertain = scaling_open && (r.ca_signed != false || r.sha1_in_use != false || r.realtime != false);
      if (scaling == true) a.uncertain = !r.realtime || !r.ca_signed || !r.sha1_in_use;
      break;
  }
  return a;
}

// ---- aggregation --------------------------------------------------------

double one_decimal_percent(std::size_t count, std::size_t total) {
  if (total == 0) throw Error(Errc::empty_input, "percentage of an empty set");
  return std::round(static_cast<double>(count) * 1000.0 / static_cast<double>(total)) / 10.0;
}

const FieldSummary& SurveySummary::at(const std::string& name) const {
  auto it = fields.find(name);
  if (it == fields.end()) throw Error(Errc::invalid_argument, "no survey field '" + name + "'");
  return it->second;
}

std::string SurveySummary::render() const {
  std::string out = "total=" + std::to_string(total) + "\n";
  for (const auto& [name, f] : fields) {
    char pct[32];
    std::snprintf(pct, sizeof pct, "%.1f", f.percent);
    out += name + "=" + std::to_string(f.count) + "/" + std::to_string(total) + " (" + pct + "%)";
    if (f.undetermined) out += " undetermined=" + std::to_string(f.undetermined);
    out += '\n';
  }
  return out;
}

SurveySummary aggregate(const std::vector<AuditReport>& reports) {
  if (reports.empty()) throw Error(Errc::empty_input, "no reports to aggregate");
  SurveySummary s;
  s.total = reports.size();
  auto tally = [&](const std::string& name, std::optional<bool> v) {
    FieldSummary& f = s.fields[name];
    if (!v) ++f.undetermined;
    else if (*v) ++f.count;
  };
  for (const AuditReport& r : reports) {
    const auto scaling = r.scaling_exposed();
    tally("realtime", r.realtime);
    tally("nonce_mirrored", r.nonce_mirrored);
    tally("scaling_exposed", scaling);
    tally("sha1_in_use", r.sha1_in_use);
    tally("sha1_and_scaling", and3(r.sha1_in_use, scaling));
    tally("ca_signed", r.ca_signed);
    tally("ca_and_scaling", and3(r.ca_signed, scaling));
    tally("good_for_nonexistent", r.good_for_nonexistent);
    tally("second_granularity",
          r.granularity ? std::optional<bool>(*r.granularity == GranularityEstimate::second) : std::nullopt);
    tally("hash_disagreement", r.hash_disagreement());
    for (auto b : {NonexistentBehavior::unknown, NonexistentBehavior::good, NonexistentBehavior::close_connection,
                   NonexistentBehavior::unauthorized, NonexistentBehavior::randomized}) {
      tally("nonexistent_" + std::string(nonexistent_behavior_name(b)),
            r.nonexistent_behavior ? std::optional<bool>(*r.nonexistent_behavior == b) : std::nullopt);
    }
    tally("grade_critical", risk_grade(r).grade == RiskGrade::critical);
  }
  for (auto& [name, f] : s.fields) f.percent = one_decimal_percent(f.count, s.total);
  return s;
}

// ---- records ------------------------------------------------------------

std::string serialize_report(const AuditReport& r) {
  KvRecord k;
  k.add("format", "ocsplab-audit-1");
  k.add("endpoint", r.endpoint);
  k.add("source", r.source);
  k.add("partial", r.partial ? "true" : "false");
  k.add("realtime", tri(r.realtime));
  k.add("nonce_mirrored", tri(r.nonce_mirrored));
  k.add("nonexistent_behavior",
        r.nonexistent_behavior ? std::string(nonexistent_behavior_name(*r.nonexistent_behavior)) : "undetermined");
  k.add("scaling_exposed", tri(r.scaling_exposed()));
  k.add("hash_algorithm", r.hash_algorithm.value_or("undetermined"));
  k.add("cert_id_hash_algorithm", r.cert_id_hash_algorithm.value_or("undetermined"));
  k.add("hash_disagreement", r.hash_disagreement() ? "true" : "false");
  k.add("sha1_in_use", tri(r.sha1_in_use));
  k.add("ca_signed", tri(r.ca_signed));
  k.add("granularity", r.granularity ? std::string(granularity_estimate_name(*r.granularity)) : "undetermined");
  k.add("good_for_nonexistent", tri(r.good_for_nonexistent));
  k.add("risk_grade", std::string(risk_grade_name(risk_grade(r).grade)));
  for (const auto& [field, idx] : r.evidence) {
    std::string v = field + ":";
    for (std::size_t i = 0; i < idx.size(); ++i) v += (i ? "," : "") + std::to_string(idx[i]);
    k.add("evidence", v);
  }
  for (const ProbeTranscript& t : r.transcripts) {
    k.add("transcript", t.label + " " + format_instant(t.sent_at) + " " + format_instant(t.received_at) + " " +
                            (t.aborted ? "1" : "0") + " " + std::to_string(t.http_status) + " " + to_hex(t.request) +
                            " " + (t.response.empty() ? "-" : to_hex(t.response)));
  }
  return k.render();
}

AuditReport parse_report(std::string_view text) {
  const KvRecord k = KvRecord::parse(text);
  if (k.require("format") != "ocsplab-audit-1") throw Error(Errc::malformed_record, "not an audit report");
  AuditReport r;
  r.endpoint = k.require("endpoint");
  r.source = k.get("source").value_or("audit");
  r.partial = parse_tri(k.require("partial")).value_or(false);
  r.realtime = parse_tri(k.require("realtime"));
  r.nonce_mirrored = parse_tri(k.require("nonce_mirrored"));
  if (const std::string b = k.require("nonexistent_behavior"); b != "undetermined") {
    r.nonexistent_behavior = parse_nonexistent_behavior(b);
  }
  if (const std::string h = k.require("hash_algorithm"); h != "undetermined") r.hash_algorithm = h;
  if (auto h = k.get("cert_id_hash_algorithm"); h && *h != "undetermined") r.cert_id_hash_algorithm = *h;
  r.sha1_in_use = parse_tri(k.require("sha1_in_use"));
  r.ca_signed = parse_tri(k.require("ca_signed"));
  if (const std::string g = k.require("granularity"); g != "undetermined") r.granularity = parse_granularity_estimate(g);
  r.good_for_nonexistent = parse_tri(k.require("good_for_nonexistent"));
  if (auto stated = k.get("scaling_exposed"); stated && parse_tri(*stated) != r.scaling_exposed()) {
    throw Error(Errc::malformed_record, "scaling_exposed contradicts the nonce and non-existent serial fields");
  }
  for (const std::string& e : k.all("evidence")) {
    const auto colon = e.find(':');
    if (colon == std::string::npos) throw Error(Errc::malformed_record, "bad evidence line '" + e + "'");
    std::vector<std::size_t> idx;
    std::string_view rest = std::string_view(e).substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto part = rest.substr(0, comma);
      std::size_t v = 0;
      auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
      if (ec != std::errc() || p != part.data() + part.size()) throw Error(Errc::malformed_record, "bad evidence index");
      idx.push_back(v);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    r.evidence[e.substr(0, colon)] = std::move(idx);
  }
  for (const std::string& line : k.all("transcript")) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= line.size()) {
      const auto sp = line.find(' ', start);
      parts.push_back(line.substr(start, sp == std::string::npos ? std::string::npos : sp - start));
      if (sp == std::string::npos) break;
      start = sp + 1;
    }
    if (parts.size() != 7) throw Error(Errc::malformed_record, "bad transcript line");
    ProbeTranscript t;
    t.label = parts[0];
    t.sent_at = parse_instant(parts[1]);
    t.received_at = parse_instant(parts[2]);
    t.aborted = parts[3] == "1";
    t.http_status = std::stoi(parts[4]);
    t.request = from_hex(parts[5]);
    if (parts[6] != "-") t.response = from_hex(parts[6]);
    r.transcripts.push_back(std::move(t));
  }
  return r;
}

void save_report(const AuditReport& r, const std::filesystem::path& path) { write_text_file(path, serialize_report(r)); }

AuditReport load_report(const std::filesystem::path& path) { return parse_report(read_text_file(path)); }

std::vector<AuditReport> load_reports(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  if (ec) throw Error(Errc::io_error, "cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  std::vector<AuditReport> out;
  for (const auto& f : files) out.push_back(load_report(f));
  return out;
}

}  // namespace ocsplab
