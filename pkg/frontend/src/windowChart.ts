import { LineChart, type LineSeriesOption } from "echarts/charts";
import {
  GridComponent,
  LegendComponent,
  TitleComponent,
  type GridComponentOption,
  type LegendComponentOption,
  type TitleComponentOption,
} from "echarts/components";
import * as echarts from "echarts/core";
import { SVGRenderer } from "echarts/renderers";

import type { WindowRow } from "./csv.js";

echarts.use([LineChart, GridComponent, LegendComponent, TitleComponent, SVGRenderer]);

export type ChartOption = echarts.ComposeOption<
  LineSeriesOption | GridComponentOption | LegendComponentOption | TitleComponentOption
>;

/** Data for one chart: tasks added in the sliding window (shared across
 * algorithms) and tasks executed, one series per algorithm. */
export interface WindowChartData {
  frequency: string;
  added: Array<[number, number]>;
  executed: Map<string, Array<[number, number]>>;
}

const SERIES_COLORS: Record<string, string> = {
  tp: "#1f77b4",
  tpts: "#2ca02c",
  central: "#d62728",
};

export function buildWindowChartData(
  frequency: string,
  byAlgorithm: Map<string, WindowRow[]>,
): WindowChartData {
  const executed = new Map<string, Array<[number, number]>>();
  let added: Array<[number, number]> = [];
  let addedLength = -1;
  for (const [algorithm, rows] of [...byAlgorithm.entries()].sort()) {
    executed.set(
      algorithm,
      rows.map((row) => [row.t, row.executed]),
    );
    // the added series comes from the run with the longest horizon so the
    // grey band spans every algorithm's timeline
    if (rows.length > addedLength) {
      addedLength = rows.length;
      added = rows.map((row) => [row.t, row.added]);
    }
  }
  return { frequency, added, executed };
}

export function windowChartOption(data: WindowChartData, windowLength = 100): ChartOption {
  const series: LineSeriesOption[] = [
    {
      name: "added",
      type: "line",
      data: data.added,
      step: "end",
      symbol: "none",
      lineStyle: { width: 0.5, color: "#999999" },
      areaStyle: { color: "#cccccc", opacity: 0.8 },
    },
  ];
  for (const [algorithm, points] of [...data.executed.entries()].sort()) {
    series.push({
      name: `executed (${algorithm})`,
      type: "line",
      data: points,
      step: "end",
      symbol: "none",
      lineStyle: { width: 2, color: SERIES_COLORS[algorithm] },
      color: SERIES_COLORS[algorithm],
    });
  }
  return {
    animation: false,
    title: {
      text: `Tasks added and executed per ${windowLength}-timestep window (frequency ${data.frequency})`,
      left: "center",
      textStyle: { fontSize: 14 },
    },
    legend: { bottom: 0 },
    grid: { left: 60, right: 20, top: 40, bottom: 60 },
    xAxis: { type: "value", name: "timestep", nameLocation: "middle", nameGap: 28, min: 0 },
    yAxis: { type: "value", name: "tasks in window", nameLocation: "middle", nameGap: 40, min: 0 },
    series,
  };
}

export function renderChartSvg(option: ChartOption, width = 900, height = 480): string {
  const chart = echarts.init(null, undefined, {
    renderer: "svg",
    ssr: true,
    width,
    height,
  });
  chart.setOption(option);
  const svg = chart.renderToSVGString();
  chart.dispose();
  return svg;
}
