const COLORS = ["#eff3ff", "#bdd7e7", "#6baed6", "#2171b5"];
const CELL_W = 132;
const CELL_H = 112;
const GAP = 8;

const svg = d3.select("svg#chart").attr("width", 600).attr("height", 260);
const layer = svg.append("g")
  .attr("id", "regions")
  .attr("transform", "translate(16,12)");

function cellOutline(i) {
  const x = (i % 4) * (CELL_W + GAP);
  const y = Math.floor(i / 4) * (CELL_H + GAP);
  return `M ${x},${y} L ${x + CELL_W},${y} L ${x + CELL_W},${y + CELL_H} ` +
    `L ${x},${y + CELL_H} Z`;
}

d3.csv("data/regions.csv", d3.autoType).then((rows) => {
  const region = layer.selectAll("path")
    .data(rows)
    .join("path")
    .attr("class", "region")
    .attr("data-name", (d) => d.region)
    .attr("d", (d, i) => cellOutline(i))
    .attr("stroke", "#fff")
    .attr("stroke-width", 2);

  function recolor(metric) {
    const scale = d3.scaleQuantile()
      .domain(rows.map((r) => r[metric]))
      .range(COLORS);
    region
      .attr("data-value", (d) => d[metric])
      .attr("fill", (d) => scale(d[metric]));
  }

  recolor("population");

  d3.select("select#metric").on("change", function () {
    recolor(this.value);
  });

  region
    .on("mouseover", function (event, d) {
      const metric = d3.select("select#metric").property("value");
      d3.select("body").append("div")
        .attr("id", "tooltip")
        .style("left", `${event.clientX + 10}px`)
        .style("top", `${event.clientY - 10}px`)
        .text(`${d.region}: ${d[metric]}`);
    })
    .on("mouseout", function () {
      d3.select("div#tooltip").remove();
    });
});
