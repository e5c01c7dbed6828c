#include "ocsplab/cli.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <map>
#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "ocsplab/assessor.hpp"
#include "ocsplab/error.hpp"
#include "ocsplab/forgery.hpp"
#include "ocsplab/http.hpp"
#include "ocsplab/pipeline.hpp"

namespace ocsplab {

namespace {

using namespace std::chrono_literals;

constexpr int exit_failure = 1;
constexpr int exit_usage = 2;

std::atomic<bool> stop_requested{false};

extern "C" void on_stop_signal(int) { stop_requested.store(true); }

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A CA certificate from DER, or from an identity record's certificate.
Certificate load_issuer(const std::string& path) {
  const Bytes raw = read_binary_file(path);
  if (!raw.empty() && raw.front() == 0x30) return decode_certificate(raw);
  return parse_identity(std::string(raw.begin(), raw.end())).certificate;
}

void require_ownership(const std::string& url, bool acknowledged) {
  const Url u = parse_url(url);
  if (!is_loopback_host(u.host) && !acknowledged) {
    throw UsageError("refusing to probe non-loopback host '" + u.host +
                     "' without --i-own-this-endpoint (only test endpoints you operate)");
  }
}

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

SearchOptions search_options(std::uint64_t budget, std::uint64_t seed, unsigned workers) {
  SearchOptions so;
  so.budget = budget;
  so.seed = seed;
  so.workers = workers;
  return so;
}

struct FakePlan {
  std::string kind = "response";
  std::string target = "7";
  std::string lifetime = "7d";
  std::string status = "good";

  void bind(CLI::App* cmd) {
    cmd->add_option("--kind", kind, "Forged content: response or certificate")->check(CLI::IsMember({"response", "certificate"}));
    cmd->add_option("--target-serial", target, "Serial the forged response vouches for");
    cmd->add_option("--lifetime", lifetime, "Validity of the forged response");
    cmd->add_option("--status", status, "Status the forged response asserts: good or unknown")
        ->check(CLI::IsMember({"good", "unknown"}));
  }

  CertStatus cert_status() const { return status == "good" ? CertStatus::good() : CertStatus::unknown(); }
};

// ---- respond ------------------------------------------------------------

int cmd_respond(const std::string& config, const std::vector<std::string>& overrides, const std::string& bind,
                const std::string& issuer_out, const std::string& url_file, double seconds, std::ostream& out) {
  KvRecord file_rec = config.empty() ? KvRecord{} : KvRecord::parse(read_text_file(config));
  KvRecord rec;
  std::vector<std::pair<std::string, std::string>> extra;
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + o + "'");
    extra.emplace_back(o.substr(0, eq), o.substr(eq + 1));
  }
  auto overridden = [&](const std::string& k) {
    return std::any_of(extra.begin(), extra.end(), [&](const auto& e) { return e.first == k; });
  };
  for (const auto& [k, v] : file_rec.entries()) {
    if (!overridden(k)) rec.add(k, v);
  }
  for (auto& [k, v] : extra) rec.add(k, v);

  const ResponderSetup setup = parse_responder_setup(rec);
  SystemClock clock;
  Responder responder(setup.config, setup.make_database(), clock);
  auto service = serve_http(responder, bind);
  if (!issuer_out.empty()) export_der(issuer_out, frame_certificate(setup.config.issuer.tbs_raw,
                                                                     setup.config.issuer.signature_algorithm,
                                                                     setup.config.issuer.signature));
  if (!url_file.empty()) write_text_file(url_file, service->url() + "\n");
  out << "listening " << service->url() << "\n" << std::flush;

  std::signal(SIGINT, on_stop_signal);
  std::signal(SIGTERM, on_stop_signal);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(seconds);
  while (!stop_requested.load() && (seconds <= 0 || std::chrono::steady_clock::now() < deadline)) {
    std::this_thread::sleep_for(50ms);
  }
  service->stop();
  out << "served " << responder.log().size() << " requests\n";
  return 0;
}

// ---- precompute ---------------------------------------------------------

struct StreamArgs {
  std::string model;
  std::string serials = "0-999";
  std::string from;
  std::string span = "24h";
  std::string dt = "1s";
  std::uint64_t nonces = 0;

  void bind(CLI::App* cmd) {
    cmd->add_option("--model", model, "Prediction model file written by profile")->required();
    cmd->add_option("--serials", serials, "Serial list, e.g. 0-999,1500");
    cmd->add_option("--from", from, "First responder time covered (ISO 8601, UTC)")->required();
    cmd->add_option("--span", span, "Length of the covered time range");
    cmd->add_option("--dt", dt, "Step between covered responder times");
    cmd->add_option("--nonces", nonces, "Counter nonces per (serial, time); 0 sends none");
  }

  std::unique_ptr<RecipeStream> stream() const {
    const PredictionModel m = load_model(model);
    const Instant t0 = parse_instant(from);
    return std::make_unique<RecipeStream>(m, parse_serial_ranges(serials), t0, t0 + parse_duration(span),
                                          parse_duration(dt),
                                          nonces ? NonceIterator::counter(nonces, m.nonce_min_length) : NonceIterator::none());
  }
};

int cmd_precompute(const StreamArgs& a, bool count_only, std::uint64_t limit, const std::string& out_path,
                   std::ostream& out) {
  const auto stream = a.stream();
  out << "count=" << stream->count() << "\n";
  if (count_only) return 0;
  std::string table = "# index serial status t fire_at nonce predicted_hash\n";
  const std::uint64_t n = std::min(limit, stream->count());
  for (std::uint64_t i = 0; i < n; ++i) {
    const RequestRecipe r = stream->at(i);
    table += std::to_string(r.index) + " " + r.serial.to_string() + " " + std::string(cert_status_name(r.status)) + " " +
             format_instant(r.t) + " " + format_instant(r.fire_at) + " " + (r.nonce ? to_hex(*r.nonce) : "-") + " " +
             to_hex(r.predicted_hash) + "\n";
  }
  if (out_path.empty()) {
    out << table;
  } else {
    write_text_file(out_path, table);
    out << "wrote " << n << " recipes to " << out_path << "\n";
  }
  return 0;
}

// ---- collide / attack ---------------------------------------------------

int cmd_collide(const StreamArgs& a, const FakePlan& plan, const std::string& hash_name, std::uint64_t budget,
                std::uint64_t seed, unsigned workers, const std::string& out_path, std::ostream& out) {
  const auto stream = a.stream();
  const PredictionModel& model = stream->model();
  const HashSpec hash = hash_name.empty() ? model.hash_spec_estimate : HashSpec::parse(hash_name);
  const SourceGenerator gen1 = recipe_generator(*stream);
  const SourceGenerator gen2 = make_fake_generator(model, parse_content_kind(plan.kind), SerialNumber::parse(plan.target),
                                                   parse_instant(a.from), parse_duration(plan.lifetime), plan.cert_status());
  const SearchResult res = birthday_search(gen1, gen2, hash, search_options(budget, seed, workers));
  out << "evaluations=" << res.stats.evaluations << " expected=" << expected_trials(hash.bits()) << "\n";
  if (!res.candidate) throw Error(Errc::budget_exhausted, "no collision within " + std::to_string(budget) + " evaluations");
  CollisionCandidate c = *res.candidate;
  attach_recipe(c, *stream);
  KvRecord rec = KvRecord::parse(serialize_candidate(c));
  rec.add("fake_kind", plan.kind);
  rec.add("fake_target", plan.target);
  rec.add("fake_this_update", a.from);
  rec.add("fake_lifetime", plan.lifetime);
  rec.add("fake_status", plan.status);
  write_text_file(out_path, rec.render());
  out << "collision " << to_hex(c.hash) << " recipe serial=" << c.recipe->serial.to_string()
      << " t=" << format_instant(c.recipe->t) << " fake_index=" << c.h2_index << "\n";
  out << "wrote " << out_path << "\n";
  return 0;
}

int cmd_attack(const std::string& url, const std::string& model_path, const std::string& candidate_path,
               TimingPolicy policy, std::optional<Duration> round_trip, const std::string& out_dir, std::ostream& out) {
  const PredictionModel model = load_model(model_path);
  const std::string text = read_text_file(candidate_path);
  const CollisionCandidate c = parse_candidate(text);
  const KvRecord rec = KvRecord::parse(text);
  FakePlan plan;
  plan.kind = rec.require("fake_kind");
  plan.target = rec.require("fake_target");
  plan.lifetime = rec.require("fake_lifetime");
  plan.status = rec.require("fake_status");
  const ContentKind kind = parse_content_kind(plan.kind);
  const SourceGenerator gen2 = make_fake_generator(model, kind, SerialNumber::parse(plan.target),
                                                   parse_instant(rec.require("fake_this_update")),
                                                   parse_duration(plan.lifetime), plan.cert_status());
  if (!c.recipe || digest(c.hash_spec, gen2.produce(c.h2_index)) != c.hash || c.recipe->predicted_hash != c.hash) {
    throw Error(Errc::digest_mismatch, "candidate does not match the model and fake-content settings");
  }
  policy.round_trip = round_trip.value_or(model.round_trip_estimate);
  SystemClock clock;
  HttpTransport transport(url, clock);
  const AttackOutcome o = execute(c, gen2, kind, transport, policy);
  out << describe_outcome(o) << "\n";
  std::filesystem::create_directories(out_dir);
  write_text_file(std::filesystem::path(out_dir) / "report.txt", describe_outcome(o));
  if (!o.artifact) return exit_failure;
  export_der(std::filesystem::path(out_dir) / "artifact.der", o.artifact->framed);
  write_text_file(std::filesystem::path(out_dir) / "artifact.txt", serialize_artifact(*o.artifact));
  out << "wrote " << out_dir << "/artifact.der\n";
  return 0;
}

// ---- report -------------------------------------------------------------

int cmd_report(const std::string& dir, bool grades, std::ostream& out) {
  const auto reports = load_reports(dir);
  out << aggregate(reports).render();
  if (grades) {
    for (const AuditReport& r : reports) {
      const RiskAssessment g = risk_grade(r);
      out << r.endpoint << " " << risk_grade_name(g.grade) << (g.uncertain ? " (uncertain)" : "") << "\n";
    }
  }
  return 0;
}

void print_audit(const AuditReport& r, std::ostream& out) {
  const RiskAssessment g = risk_grade(r);
  AuditReport summary = r;
  summary.evidence.clear();
  summary.transcripts.clear();
  out << serialize_report(summary);
  out << "grade " << risk_grade_name(g.grade) << (g.uncertain ? " (uncertain)" : "");
  for (const auto& t : g.triggers) out << " " << t;
  out << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"OCSP response prediction and collision lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ocsplab 0.1.0");

  int code = 0;
  auto guarded = [&](auto&& fn) {
    return [&, fn]() { code = fn(); };
  };

  // respond
  std::string r_config, r_bind = "127.0.0.1:0", r_issuer_out, r_url_file;
  std::vector<std::string> r_set;
  double r_seconds = 0;
  auto* respond = app.add_subcommand("respond", "Serve a mock OCSP responder over HTTP");
  respond->add_option("--config", r_config, "Responder key=value file");
  respond->add_option("--set", r_set, "Override one responder key (key=value), repeatable");
  respond->add_option("--bind", r_bind, "host:port to listen on; port 0 picks one");
  respond->add_option("--issuer-out", r_issuer_out, "Write the issuing CA certificate (DER) here");
  respond->add_option("--url-file", r_url_file, "Write the service URL here once listening");
  respond->add_option("--seconds", r_seconds, "Stop after this many seconds; 0 runs until interrupted");
  // Every responder key is also a flag: nonce_policy becomes --nonce-policy.
  std::map<std::string, std::string> r_fields;
  std::vector<std::string> r_revoked;
  for (const std::string& key : responder_setup_keys()) {
    if (key == "revoked") continue;
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    respond->add_option(flag, r_fields[key], "Responder key '" + key + "'");
  }
  respond->add_option("--revoked", r_revoked, "Revoked entry serial@time, repeatable");
  respond->callback(guarded([&] {
    std::vector<std::string> overrides;
    for (const auto& [k, v] : r_fields) {
      if (!v.empty()) overrides.push_back(k + "=" + v);
    }
    for (const auto& v : r_revoked) overrides.push_back("revoked=" + v);
    overrides.insert(overrides.end(), r_set.begin(), r_set.end());
    return cmd_respond(r_config, overrides, r_bind, r_issuer_out, r_url_file, r_seconds, out);
  }));

  // profile
  std::string p_url, p_issuer, p_out = "model.txt";
  std::vector<std::string> p_serials;
  int p_probes = 12;
  bool p_ack = false;
  std::uint64_t p_seed = 1;
  auto* prof = app.add_subcommand("profile", "Probe a responder and fit a prediction model");
  prof->add_option("url", p_url, "Responder URL")->required();
  prof->add_option("--issuer", p_issuer, "Issuer certificate (DER) or identity file")->required();
  prof->add_option("--serial", p_serials, "Known serial to probe, repeatable")->required();
  prof->add_option("--probes", p_probes, "Number of probe requests")->check(CLI::Range(3, 1000));
  prof->add_option("--seed", p_seed, "Seed for probe nonces");
  prof->add_option("--out", p_out, "Model output file");
  prof->add_flag("--i-own-this-endpoint", p_ack, "Acknowledge that a non-loopback target is yours");
  prof->callback(guarded([&] {
    require_ownership(p_url, p_ack);
    SystemClock clock;
    HttpTransport transport(p_url, clock);
    std::vector<SerialNumber> serials;
    for (const auto& s : p_serials) serials.push_back(SerialNumber::parse(s));
    ProfileOptions po;
    po.seed = p_seed;
    const PredictionModel m = profile(transport, load_issuer(p_issuer), serials, p_probes, po);
    save_model(m, p_out);
    out << "mode=" << responder_mode_name(m.mode_estimate)
        << " granularity=" << granularity_estimate_name(m.granularity_estimate)
        << " clock_bias=" << format_duration(m.clock_bias_estimate)
        << " nonce_supported=" << (m.nonce_supported ? "true" : "false") << "\nwrote " << p_out << "\n";
    return 0;
  }));

  // precompute
  StreamArgs pc;
  bool pc_count = false;
  std::uint64_t pc_limit = 20;
  std::string pc_out;
  auto* pre = app.add_subcommand("precompute", "Enumerate request recipes and their predicted responses");
  pc.bind(pre);
  pre->add_flag("--count-only", pc_count, "Print the recipe count without materializing any");
  pre->add_option("--limit", pc_limit, "Number of recipes to list");
  pre->add_option("--out", pc_out, "Write the listing here instead of stdout");
  pre->callback(guarded([&] { return cmd_precompute(pc, pc_count, pc_limit, pc_out, out); }));

  // collide
  StreamArgs cl;
  FakePlan cl_plan;
  std::string cl_hash, cl_out = "candidate.txt";
  std::uint64_t cl_budget = std::uint64_t{1} << 22, cl_seed = 1;
  unsigned cl_workers = default_workers();
  auto* col = app.add_subcommand("collide", "Birthday search between recipes and fake content");
  cl.bind(col);
  cl_plan.bind(col);
  col->add_option("--hash", cl_hash, "Hash to collide (default: the model's signature hash)");
  col->add_option("--budget", cl_budget, "Maximum hash evaluations");
  col->add_option("--seed", cl_seed, "Search seed");
  col->add_option("--workers", cl_workers, "Worker threads")->check(CLI::Range(1u, 1024u));
  col->add_option("--out", cl_out, "Candidate output file");
  col->callback(guarded([&] { return cmd_collide(cl, cl_plan, cl_hash, cl_budget, cl_seed, cl_workers, cl_out, out); }));

  // attack
  std::string a_url, a_model, a_candidate, a_out = "attack-out", a_window = "5s", a_rtt;
  double a_rate = 10;
  int a_abort = 50;
  bool a_ack = false;
  auto* att = app.add_subcommand("attack", "Send the timed burst for a candidate and splice the artifact");
  att->add_option("url", a_url, "Responder URL")->required();
  att->add_option("--model", a_model, "Prediction model file")->required();
  att->add_option("--candidate", a_candidate, "Candidate file written by collide")->required();
  att->add_option("--window", a_window, "Width of the send window");
  att->add_option("--rate", a_rate, "Requests per second within the window")->check(CLI::PositiveNumber);
  att->add_option("--abort-after", a_abort, "Maximum requests sent")->check(CLI::Range(1, 100000));
  att->add_option("--round-trip", a_rtt, "Override the model's round-trip estimate");
  att->add_option("--out", a_out, "Directory for artifact.der and artifact.txt");
  att->add_flag("--i-own-this-endpoint", a_ack, "Acknowledge that a non-loopback target is yours");
  att->callback(guarded([&] {
    require_ownership(a_url, a_ack);
    TimingPolicy tp;
    tp.window = parse_duration(a_window);
    tp.rate = a_rate;
    tp.abort_after = a_abort;
    std::optional<Duration> rtt;
    if (!a_rtt.empty()) rtt = parse_duration(a_rtt);
    return cmd_attack(a_url, a_model, a_candidate, tp, rtt, a_out, out);
  }));

  // audit
  std::string au_url, au_issuer, au_serial, au_out, au_gap = "2500ms";
  int au_budget = audit_battery_size;
  std::uint64_t au_seed = 1;
  bool au_ack = false;
  auto* aud = app.add_subcommand("audit", "Black-box exposure audit of one responder");
  aud->add_option("url", au_url, "Responder URL")->required();
  aud->add_option("--issuer", au_issuer, "Issuer certificate (DER) or identity file")->required();
  aud->add_option("--serial", au_serial, "A serial the responder knows")->required();
  aud->add_option("--budget", au_budget, "Probe budget")->check(CLI::Range(0, audit_battery_size));
  aud->add_option("--gap", au_gap, "Gap between the two realtime probes");
  aud->add_option("--seed", au_seed, "Seed for the probe nonce");
  aud->add_option("--out", au_out, "Write the full report record (with transcripts) here");
  aud->add_flag("--i-own-this-endpoint", au_ack, "Acknowledge that a non-loopback target is yours");
  aud->callback(guarded([&] {
    require_ownership(au_url, au_ack);
    SystemClock clock;
    HttpTransport transport(au_url, clock);
    AuditOptions ao;
    ao.probe_budget = au_budget;
    ao.realtime_gap = parse_duration(au_gap);
    ao.seed = au_seed;
    const AuditReport r = audit(transport, load_issuer(au_issuer), SerialNumber::parse(au_serial), ao);
    if (!au_out.empty()) save_report(r, au_out);
    print_audit(r, out);
    return 0;
  }));

  // report
  std::string rp_dir;
  bool rp_grades = false;
  auto* rep = app.add_subcommand("report", "Aggregate a directory of audit reports");
  rep->add_option("dir", rp_dir, "Directory of *.txt audit records")->required()->check(CLI::ExistingDirectory);
  rep->add_flag("--grades", rp_grades, "Also list each endpoint's risk grade");
  rep->callback(guarded([&] { return cmd_report(rp_dir, rp_grades, out); }));

  // demo
  std::string d_hash = "toy32", d_cm = "none", d_kind = "response", d_signer = "dedicated", d_eku = "proper", d_out;
  DemoOptions d;
  d.workers = default_workers();
  auto* demo = app.add_subcommand("demo", "Full in-process attack against a mock responder");
  demo->add_option("--hash", d_hash, "Responder signature hash, e.g. toy32 or toy40-sha1");
  demo->add_option("--seed", d.seed, "Experiment seed");
  demo->add_option("--countermeasure", d_cm, "none, ms-granularity, random-bias, responder-nonce or rate-limit")
      ->check(CLI::IsMember({"none", "ms-granularity", "random-bias", "responder-nonce", "rate-limit"}));
  demo->add_option("--kind", d_kind, "Forged content: response or certificate")
      ->check(CLI::IsMember({"response", "certificate"}));
  demo->add_option("--signer", d_signer, "Responder signer: ca or dedicated")->check(CLI::IsMember({"ca", "dedicated"}));
  demo->add_option("--eku", d_eku, "EKU profile of the dedicated signer certificate");
  demo->add_option("--workers", d.workers, "Worker threads")->check(CLI::Range(1u, 1024u));
  demo->add_option("--budget", d.budget, "Maximum hash evaluations");
  demo->add_option("--serials", d.serials, "Number of known serials")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{100000}));
  demo->add_option("--out", d_out, "Directory for model, candidate, artifact and report files");
  demo->callback(guarded([&] {
    d.hash = HashSpec::parse(d_hash);
    d.countermeasure = parse_countermeasure(d_cm);
    d.kind = parse_content_kind(d_kind);
    d.signer = parse_signer_role(d_signer);
    d.eku = parse_eku_profile(d_eku);
    if (!d_out.empty()) d.out_dir = d_out;
    const DemoResult res = run_demo(d);
    out << res.report();
    return res.forged ? 0 : exit_failure;
  }));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << "run '" << app.get_name() << " " << sub->get_name() << " --help' for usage\n";
    }
    return exit_usage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.code() == Errc::invalid_argument ? exit_usage : exit_failure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_failure;
  }
  return code;
}

}  // namespace ocsplab
