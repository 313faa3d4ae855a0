#include "synthetic.hpp"

#include "nids/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace nids::testing {

namespace {

struct Rng {
    std::mt19937_64 engine;

    double unit() { return unit_draw(engine); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
    long count(long lo, long hi) { return lo + static_cast<long>(bounded_draw(engine, static_cast<std::uint64_t>(hi - lo + 1))); }
    bool chance(double p) { return unit() < p; }
    /// Rate feature rounded to two decimals like the NSL-KDD files.
    double rate(double center, double spread) {
        const double v = std::clamp(center + uniform(-spread, spread), 0.0, 1.0);
        return std::round(v * 100.0) / 100.0;
    }
    /// Heavy-tailed byte count.
    double bytes(double lo, double hi) { return std::floor(std::exp(uniform(std::log(lo), std::log(hi)))); }
    template <typename T>
    const T& pick(const std::vector<T>& items) {
        return items[static_cast<std::size_t>(bounded_draw(engine, items.size()))];
    }
};

enum F : std::size_t {
    duration = 0, src_bytes = 4, dst_bytes, land, wrong_fragment, urgent, hot, num_failed_logins, logged_in,
    num_compromised, root_shell, su_attempted, num_root, num_file_creations, num_shells, num_access_files,
    num_outbound_cmds, is_host_login, is_guest_login, count, srv_count, serror_rate, srv_serror_rate, rerror_rate,
    srv_rerror_rate, same_srv_rate, diff_srv_rate, srv_diff_host_rate, dst_host_count, dst_host_srv_count,
    dst_host_same_srv_rate, dst_host_diff_srv_rate, dst_host_same_src_port_rate, dst_host_srv_diff_host_rate,
    dst_host_serror_rate, dst_host_srv_serror_rate, dst_host_rerror_rate, dst_host_srv_rerror_rate
};

using Fill = void (*)(Rng&, ConnectionRecord&);

struct Profile {
    const char* label;
    double weight;
    bool novel;
    std::vector<std::string> protocols;
    std::vector<std::string> services;
    std::vector<std::string> flags;
    Fill fill;
};

void flood_rates(Rng& r, ConnectionRecord& x, double serror, double rerror) {
    x.numeric[F::serror_rate] = r.rate(serror, 0.05);
    x.numeric[F::srv_serror_rate] = r.rate(serror, 0.05);
    x.numeric[F::rerror_rate] = r.rate(rerror, 0.05);
    x.numeric[F::srv_rerror_rate] = r.rate(rerror, 0.05);
    x.numeric[F::dst_host_serror_rate] = r.rate(serror, 0.08);
    x.numeric[F::dst_host_srv_serror_rate] = r.rate(serror, 0.08);
    x.numeric[F::dst_host_rerror_rate] = r.rate(rerror, 0.08);
    x.numeric[F::dst_host_srv_rerror_rate] = r.rate(rerror, 0.08);
}

void host_profile(Rng& r, ConnectionRecord& x, long hosts_lo, long hosts_hi, double same_srv, double diff_srv) {
    x.numeric[F::dst_host_count] = static_cast<double>(r.count(hosts_lo, hosts_hi));
    x.numeric[F::dst_host_srv_count] = static_cast<double>(r.count(1, std::max(1L, static_cast<long>(x.numeric[F::dst_host_count]))));
    x.numeric[F::dst_host_same_srv_rate] = r.rate(same_srv, 0.1);
    x.numeric[F::dst_host_diff_srv_rate] = r.rate(diff_srv, 0.1);
    x.numeric[F::same_srv_rate] = r.rate(same_srv, 0.1);
    x.numeric[F::diff_srv_rate] = r.rate(diff_srv, 0.1);
}

const std::vector<Profile>& profiles() {
    static const std::vector<Profile> all = {
        {"normal", 52.0, false, {"tcp", "tcp", "tcp", "udp", "icmp"},
         {"http", "http", "smtp", "ftp_data", "domain_u", "private", "ftp", "telnet", "ecr_i", "other", "finger", "auth"},
         {"SF", "SF", "SF", "SF", "S1", "REJ"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::duration] = r.chance(0.9) ? 0 : static_cast<double>(r.count(1, 2000));
             x.numeric[F::src_bytes] = r.bytes(50, 20000);
             x.numeric[F::dst_bytes] = r.chance(0.2) ? 0 : r.bytes(50, 50000);
             x.numeric[F::logged_in] = x.tokens[0] == "tcp" ? 1 : 0;
             x.numeric[F::hot] = r.chance(0.05) ? static_cast<double>(r.count(1, 3)) : 0;
             x.numeric[F::count] = static_cast<double>(r.count(1, 25));
             x.numeric[F::srv_count] = static_cast<double>(r.count(1, 30));
             flood_rates(r, x, 0.0, 0.02);
             host_profile(r, x, 20, 255, 0.9, 0.02);
             x.numeric[F::dst_host_same_src_port_rate] = r.rate(0.05, 0.05);
             x.numeric[F::dst_host_srv_diff_host_rate] = r.rate(0.03, 0.03);
         }},
        {"neptune", 20.0, false, {"tcp"}, {"private", "other", "telnet", "http", "ftp_data", "finger", "Z39_50", "uucp"},
         {"S0", "S0", "S0", "REJ"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::count] = static_cast<double>(r.count(100, 511));
             x.numeric[F::srv_count] = static_cast<double>(r.count(1, 30));
             flood_rates(r, x, x.tokens[2] == "S0" ? 1.0 : 0.0, x.tokens[2] == "REJ" ? 1.0 : 0.0);
             host_profile(r, x, 200, 255, 0.05, 0.07);
         }},
        {"smurf", 3.0, false, {"icmp"}, {"ecr_i"}, {"SF"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::src_bytes] = r.chance(0.5) ? 520 : 1032;
             x.numeric[F::count] = static_cast<double>(r.count(300, 511));
             x.numeric[F::srv_count] = x.numeric[F::count];
             host_profile(r, x, 200, 255, 1.0, 0.0);
             x.numeric[F::dst_host_same_src_port_rate] = r.rate(0.9, 0.1);
         }},
        {"back", 1.0, false, {"tcp"}, {"http"}, {"SF", "RSTR"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::src_bytes] = 54540;
             x.numeric[F::dst_bytes] = r.chance(0.8) ? 8314 : 7300;
             x.numeric[F::hot] = 2;
             x.numeric[F::logged_in] = 1;
             x.numeric[F::num_compromised] = 1;
             x.numeric[F::count] = static_cast<double>(r.count(1, 12));
             x.numeric[F::srv_count] = static_cast<double>(r.count(1, 12));
             host_profile(r, x, 50, 255, 1.0, 0.0);
         }},
        {"teardrop", 0.8, false, {"udp"}, {"private"}, {"SF"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::src_bytes] = 28;
             x.numeric[F::wrong_fragment] = 3;
             x.numeric[F::count] = static_cast<double>(r.count(1, 100));
             x.numeric[F::srv_count] = x.numeric[F::count];
             host_profile(r, x, 10, 255, 0.5, 0.05);
         }},
        {"pod", 0.5, false, {"icmp"}, {"ecr_i", "tim_i"}, {"SF"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::src_bytes] = 1480;
             x.numeric[F::wrong_fragment] = 1;
             x.numeric[F::count] = static_cast<double>(r.count(1, 10));
             x.numeric[F::srv_count] = x.numeric[F::count];
             host_profile(r, x, 1, 255, 0.8, 0.05);
         }},
        {"land", 0.3, false, {"tcp"}, {"finger", "telnet", "http"}, {"S0"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::land] = 1;
             x.numeric[F::count] = 1;
             x.numeric[F::srv_count] = 1;
             flood_rates(r, x, 1.0, 0.0);
             host_profile(r, x, 1, 10, 1.0, 0.0);
         }},
        {"satan", 3.0, false, {"tcp", "tcp", "udp"}, {"private", "other", "finger", "telnet", "ftp", "smtp", "http"},
         {"REJ", "RSTO", "S0", "SF"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::count] = static_cast<double>(r.count(1, 80));
             x.numeric[F::srv_count] = static_cast<double>(r.count(1, 5));
             flood_rates(r, x, 0.1, 0.7);
             host_profile(r, x, 100, 255, 0.05, 0.6);
             x.numeric[F::dst_host_same_src_port_rate] = r.rate(0.2, 0.2);
         }},
        {"ipsweep", 3.0, false, {"icmp"}, {"eco_i", "ecr_i"}, {"SF"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::src_bytes] = static_cast<double>(r.count(8, 18));
             x.numeric[F::count] = static_cast<double>(r.count(1, 5));
             x.numeric[F::srv_count] = static_cast<double>(r.count(1, 60));
             host_profile(r, x, 1, 100, 1.0, 0.0);
             x.numeric[F::srv_diff_host_rate] = r.rate(0.9, 0.1);
             x.numeric[F::dst_host_srv_diff_host_rate] = r.rate(0.6, 0.3);
             x.numeric[F::dst_host_same_src_port_rate] = r.rate(0.9, 0.1);
         }},
        {"portsweep", 2.5, false, {"tcp"}, {"private", "other", "ftp", "telnet", "http"}, {"REJ", "RSTR", "RSTO", "SF"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::duration] = r.chance(0.2) ? static_cast<double>(r.count(1000, 40000)) : 0;
             x.numeric[F::count] = static_cast<double>(r.count(1, 5));
             x.numeric[F::srv_count] = static_cast<double>(r.count(1, 5));
             flood_rates(r, x, 0.0, 0.9);
             host_profile(r, x, 1, 80, 0.1, 0.9);
             x.numeric[F::dst_host_same_src_port_rate] = r.rate(1.0, 0.05);
         }},
        {"nmap", 1.2, false, {"tcp", "udp", "icmp"}, {"private", "eco_i", "other"}, {"SH", "S0", "SF", "REJ"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::src_bytes] = x.tokens[0] == "icmp" ? 8 : 0;
             x.numeric[F::count] = static_cast<double>(r.count(1, 3));
             x.numeric[F::srv_count] = static_cast<double>(r.count(1, 3));
             flood_rates(r, x, 0.3, 0.3);
             host_profile(r, x, 1, 255, 0.1, 0.7);
             x.numeric[F::dst_host_srv_diff_host_rate] = r.rate(0.5, 0.4);
         }},
        {"warezclient", 0.8, false, {"tcp"}, {"ftp_data", "ftp"}, {"SF"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::duration] = static_cast<double>(r.count(0, 500));
             x.numeric[F::src_bytes] = r.bytes(100000, 5000000);
             x.numeric[F::hot] = static_cast<double>(r.count(0, 28));
             x.numeric[F::logged_in] = 1;
             x.numeric[F::is_guest_login] = 1;
             x.numeric[F::count] = static_cast<double>(r.count(1, 3));
             x.numeric[F::srv_count] = static_cast<double>(r.count(1, 3));
             host_profile(r, x, 1, 255, 0.6, 0.05);
         }},
        {"guess_passwd", 0.4, false, {"tcp"}, {"telnet", "pop_3", "imap4"}, {"RSTO", "SF"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::duration] = static_cast<double>(r.count(1, 10));
             x.numeric[F::src_bytes] = static_cast<double>(r.count(100, 130));
             x.numeric[F::dst_bytes] = static_cast<double>(r.count(150, 180));
             x.numeric[F::num_failed_logins] = 1;
             x.numeric[F::hot] = 1;
             x.numeric[F::count] = 1;
             x.numeric[F::srv_count] = 1;
             host_profile(r, x, 1, 255, 1.0, 0.0);
         }},
        {"warezmaster", 0.2, false, {"tcp"}, {"ftp"}, {"SF"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::duration] = static_cast<double>(r.count(10, 15000));
             x.numeric[F::src_bytes] = r.bytes(300, 2000);
             x.numeric[F::dst_bytes] = r.bytes(5000000, 9000000);
             x.numeric[F::hot] = static_cast<double>(r.count(20, 30));
             x.numeric[F::logged_in] = 1;
             x.numeric[F::is_guest_login] = 1;
             x.numeric[F::count] = 1;
             x.numeric[F::srv_count] = 1;
             host_profile(r, x, 1, 50, 0.5, 0.1);
         }},
        {"imap", 0.15, false, {"tcp"}, {"imap4"}, {"SH", "S0", "SF"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::src_bytes] = r.chance(0.5) ? 0 : r.bytes(1000, 5000);
             x.numeric[F::dst_bytes] = r.bytes(100, 30000);
             x.numeric[F::count] = static_cast<double>(r.count(1, 10));
             x.numeric[F::srv_count] = static_cast<double>(r.count(1, 10));
             flood_rates(r, x, 0.6, 0.0);
             host_profile(r, x, 1, 20, 0.9, 0.0);
         }},
        {"ftp_write", 0.15, false, {"tcp"}, {"ftp", "ftp_data", "login"}, {"SF"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::duration] = static_cast<double>(r.count(0, 200));
             x.numeric[F::src_bytes] = r.bytes(200, 700);
             x.numeric[F::logged_in] = 1;
             x.numeric[F::num_file_creations] = static_cast<double>(r.count(1, 2));
             x.numeric[F::num_access_files] = static_cast<double>(r.count(0, 1));
             x.numeric[F::hot] = 1;
             x.numeric[F::count] = 1;
             x.numeric[F::srv_count] = 1;
             host_profile(r, x, 1, 10, 0.3, 0.2);
         }},
        {"buffer_overflow", 0.25, false, {"tcp"}, {"telnet", "ftp_data"}, {"SF"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::duration] = static_cast<double>(r.count(50, 300));
             x.numeric[F::src_bytes] = r.bytes(1000, 5000);
             x.numeric[F::dst_bytes] = r.bytes(1000, 10000);
             x.numeric[F::hot] = static_cast<double>(r.count(1, 4));
             x.numeric[F::logged_in] = 1;
             x.numeric[F::root_shell] = 1;
             x.numeric[F::num_file_creations] = static_cast<double>(r.count(0, 3));
             x.numeric[F::num_shells] = static_cast<double>(r.count(0, 1));
             x.numeric[F::count] = 1;
             x.numeric[F::srv_count] = 1;
             host_profile(r, x, 1, 10, 0.5, 0.2);
         }},
        {"rootkit", 0.15, false, {"tcp", "udp"}, {"telnet", "ftp_data", "private"}, {"SF"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::duration] = static_cast<double>(r.count(0, 700));
             x.numeric[F::src_bytes] = r.bytes(20, 2000);
             x.numeric[F::hot] = static_cast<double>(r.count(0, 2));
             x.numeric[F::logged_in] = x.tokens[0] == "tcp" ? 1 : 0;
             x.numeric[F::num_root] = static_cast<double>(r.count(0, 2));
             x.numeric[F::num_file_creations] = static_cast<double>(r.count(1, 3));
             x.numeric[F::count] = 1;
             x.numeric[F::srv_count] = 1;
             host_profile(r, x, 1, 5, 0.3, 0.3);
         }},
        {"loadmodule", 0.12, false, {"tcp"}, {"telnet", "ftp_data"}, {"SF"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::duration] = static_cast<double>(r.count(10, 100));
             x.numeric[F::src_bytes] = r.bytes(200, 3000);
             x.numeric[F::hot] = 1;
             x.numeric[F::logged_in] = 1;
             x.numeric[F::num_root] = static_cast<double>(r.count(1, 3));
             x.numeric[F::num_shells] = 1;
             x.numeric[F::count] = 1;
             x.numeric[F::srv_count] = 1;
             host_profile(r, x, 1, 5, 0.5, 0.1);
         }},
        {"perl", 0.08, false, {"tcp"}, {"telnet"}, {"SF"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::duration] = static_cast<double>(r.count(10, 100));
             x.numeric[F::src_bytes] = r.bytes(200, 2000);
             x.numeric[F::hot] = static_cast<double>(r.count(1, 2));
             x.numeric[F::logged_in] = 1;
             x.numeric[F::root_shell] = 1;
             x.numeric[F::su_attempted] = 1;
             x.numeric[F::num_root] = static_cast<double>(r.count(2, 5));
             x.numeric[F::count] = 1;
             x.numeric[F::srv_count] = 1;
             host_profile(r, x, 1, 5, 0.5, 0.1);
         }},
        {"mscan", 1.2, true, {"tcp", "udp"}, {"private", "other", "imap4", "domain", "sunrpc", "http"}, {"REJ", "S0", "SF", "RSTR"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::count] = static_cast<double>(r.count(1, 50));
             x.numeric[F::srv_count] = static_cast<double>(r.count(1, 3));
             flood_rates(r, x, 0.3, 0.5);
             host_profile(r, x, 200, 255, 0.02, 0.8);
             x.numeric[F::dst_host_srv_diff_host_rate] = r.rate(0.3, 0.2);
         }},
        {"apache2", 0.9, true, {"tcp"}, {"http"}, {"SF", "RSTR", "S0", "S3"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::duration] = r.chance(0.3) ? static_cast<double>(r.count(1, 20)) : 0;
             x.numeric[F::src_bytes] = r.bytes(100, 4000);
             x.numeric[F::count] = static_cast<double>(r.count(50, 200));
             x.numeric[F::srv_count] = x.numeric[F::count];
             x.numeric[F::hot] = static_cast<double>(r.count(0, 2));
             flood_rates(r, x, 0.4, 0.2);
             host_profile(r, x, 200, 255, 1.0, 0.0);
         }},
        {"processtable", 0.8, true, {"tcp"}, {"private", "http", "other"}, {"SF", "RSTR"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::duration] = static_cast<double>(r.count(1000, 30000));
             x.numeric[F::count] = static_cast<double>(r.count(1, 4));
             x.numeric[F::srv_count] = static_cast<double>(r.count(1, 4));
             host_profile(r, x, 100, 255, 0.5, 0.05);
         }},
        {"snmpguess", 0.4, true, {"udp"}, {"private"}, {"SF"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::src_bytes] = static_cast<double>(r.count(30, 40));
             x.numeric[F::count] = static_cast<double>(r.count(1, 300));
             x.numeric[F::srv_count] = x.numeric[F::count];
             host_profile(r, x, 200, 255, 1.0, 0.0);
             x.numeric[F::dst_host_same_src_port_rate] = r.rate(0.95, 0.05);
         }},
        {"saint", 0.4, true, {"tcp"}, {"private", "other", "telnet", "ftp"}, {"REJ", "RSTO", "SF"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::count] = static_cast<double>(r.count(1, 40));
             x.numeric[F::srv_count] = static_cast<double>(r.count(1, 3));
             flood_rates(r, x, 0.0, 0.8);
             host_profile(r, x, 150, 255, 0.02, 0.5);
         }},
        {"httptunnel", 0.15, true, {"tcp"}, {"http", "ftp_data"}, {"SF"},
         [](Rng& r, ConnectionRecord& x) {
             x.numeric[F::duration] = static_cast<double>(r.count(100, 10000));
             x.numeric[F::src_bytes] = r.bytes(100, 3000);
             x.numeric[F::dst_bytes] = r.bytes(100, 3000);
             x.numeric[F::logged_in] = 1;
             x.numeric[F::hot] = static_cast<double>(r.count(0, 2));
             x.numeric[F::count] = 1;
             x.numeric[F::srv_count] = 1;
             host_profile(r, x, 1, 30, 0.4, 0.1);
         }},
    };
    return all;
}

ConnectionRecord make_record(Rng& rng, const Profile& profile) {
    ConnectionRecord record;
    record.tokens[0] = rng.pick(profile.protocols);
    record.tokens[1] = rng.pick(profile.services);
    record.tokens[2] = rng.pick(profile.flags);
    profile.fill(rng, record);
    record.label = profile.label;
    record.difficulty = static_cast<int>(rng.count(1, 21));
    return record;
}

} // namespace

std::vector<ConnectionRecord> synthetic_corpus(const SyntheticOptions& options) {
    Rng rng{std::mt19937_64(options.seed)};
    std::vector<const Profile*> active;
    double total_weight = 0.0;
    for (const auto& profile : profiles()) {
        if (!profile.novel || options.novel_types) {
            active.push_back(&profile);
            total_weight += profile.weight;
        }
    }
    std::vector<ConnectionRecord> records;
    records.reserve(options.records);
    for (std::size_t i = 0; i < options.records; ++i) {
        double u = rng.unit() * total_weight;
        const Profile* chosen = active.back();
        for (const auto* profile : active) {
            if (u < profile->weight) {
                chosen = profile;
                break;
            }
            u -= profile->weight;
        }
        auto record = make_record(rng, *chosen);
        if (options.noise > 0.0 && rng.chance(options.noise * 10.0)) {
            const auto other = make_record(rng, *rng.pick(active));
            for (std::size_t f = 0; f < kFeatureCount; ++f) {
                if (!is_categorical(f) && rng.chance(0.1)) {
                    record.numeric[f] = other.numeric[f];
                }
            }
        }
        records.push_back(std::move(record));
    }
    return records;
}

LabelTaxonomy bundled_taxonomy() {
    return LabelTaxonomy::load(NIDS_SOURCE_DIR "/data/attack_taxonomy.csv");
}

} // namespace nids::testing
