/** Render gain-versus-time traces for the three tracking schemes. */

import { runPlot } from "./cli.js";

process.exit(runPlot("tracking_gain", "fig6.svg", process.argv.slice(2)));
