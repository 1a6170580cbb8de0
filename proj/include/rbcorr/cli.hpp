#pragma once

namespace rbcorr {

/// Toolkit entry point. Subcommands: ingest, eval, correct, sweep, transfer,
/// synth, harvest, report. Returns 0 on success, 2 on usage errors, 1 on
/// data errors.
int cli_dispatch(int argc, const char* const* argv);

}  // namespace rbcorr
