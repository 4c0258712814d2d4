#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ellipsis/audit_record.hpp"
#include "ellipsis/template.hpp"

namespace ellipsis {

struct ReconstructOptions {
    /// Number reconstructed records from the reduced stream's serial space
    /// and tag them `synthetic=yes` instead of rendering the serial unknown.
    bool synthesize_serials = false;
};

/// A reconstructed record together with where it came from.
struct ExpandedRecord {
    AuditRecord record;
    bool synthesized = false;    // false: passed through from the reduced log
    std::size_t source_index = 0;  // index in the reduced log
};

/// Expands every template record into rep * length SYSCALL records. Syscall
/// numbers and constrained arguments come from the template; wildcard
/// arguments, serial, success, exit and items are unknown. The first record
/// of a span is stamped stime, the last etime, the rest [stime, etime].
/// Throws UnknownTemplate or RepInvalid.
std::vector<ExpandedRecord> expand(std::span<const AuditRecord> reduced, const TemplateSet& templates,
                                   const ReconstructOptions& options = {});
std::vector<AuditRecord> reconstruct(std::span<const AuditRecord> reduced, const TemplateSet& templates,
                                     const ReconstructOptions& options = {});

struct RetentionReport {
    std::uint64_t original_events = 0;
    std::uint64_t reconstructed_events = 0;
    std::uint64_t raw_exact = 0;        // passed through byte-identical
    std::uint64_t synthesized = 0;
    std::uint64_t exact_timestamps = 0;
    std::uint64_t ranged_timestamps = 0;
    // Information the reduction dropped, field by field.
    std::uint64_t lost_serials = 0;
    std::uint64_t lost_arguments = 0;
    std::uint64_t lost_success = 0;
    std::uint64_t lost_exit = 0;
    std::uint64_t lost_items = 0;
    std::uint64_t lost_extras = 0;
    /// The reconstructed stream no longer reproduces the cross-task order.
    bool interleaving_lost = false;
};

/// Checks that reconstructing `reduced` gives back `original`: every task's
/// events in order, raw records byte-identical, syscalls, constrained
/// arguments and identity exact, and true timestamps within their bounds.
/// Throws RetentionViolation at the first original record that diverges.
RetentionReport verify_retention(std::span<const AuditRecord> original, std::span<const AuditRecord> reduced,
                                 const TemplateSet& templates);

}  // namespace ellipsis
