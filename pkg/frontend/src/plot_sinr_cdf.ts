/** Render the SINR CDF figure: one panel per user kind, three schemes. */

import { runPlot } from "./cli.js";

process.exit(runPlot("sinr_cdf", "fig5.svg", process.argv.slice(2)));
