const width = 640;
const height = 520;
const margin = { top: 24, right: 24, bottom: 36, left: 56 };
const mainHeight = 300;
const subTop = margin.top + mainHeight + 70;
const subHeight = 110;

const BASE_RADIUS = 4;
const HOVER_RADIUS = 7;
const BASE_FILL = "#1f77b4";
const HOVER_FILL = "darkorange";

const svg = d3.select("svg#chart").attr("width", width).attr("height", height);
const plot = svg.append("g")
  .attr("transform", `translate(${margin.left},${margin.top})`);
const innerWidth = width - margin.left - margin.right;

const subchart = svg.append("g")
  .attr("id", "subchart")
  .attr("transform", `translate(${margin.left},${subTop})`);

Promise.all([
  d3.csv("data/series.csv", d3.autoType),
  d3.csv("data/breakdown.csv", d3.autoType),
]).then(([series, breakdown]) => {
  const x = d3.scaleLinear()
    .domain(d3.extent(series, (d) => d.year))
    .range([0, innerWidth]);

  const y = d3.scaleLinear()
    .domain([0, d3.max(series, (d) => d.value)])
    .nice()
    .range([mainHeight, 0]);

  plot.append("g")
    .attr("id", "x-axis")
    .attr("transform", `translate(0,${mainHeight})`)
    .call(d3.axisBottom(x));

  plot.append("g")
    .attr("id", "y-axis")
    .call(d3.axisLeft(y));

  plot.append("path")
    .attr("id", "trend")
    .datum(series)
    .attr("fill", "none")
    .attr("stroke", "#888")
    .attr("stroke-width", 1.5)
    .attr("d", d3.line().x((d) => x(d.year)).y((d) => y(d.value)));

  const byYear = d3.group(breakdown, (d) => d.year);

  function showBreakdown(year) {
    const rows = byYear.get(year) || [];
    const bx = d3.scaleBand()
      .domain(rows.map((r) => r.category))
      .range([0, innerWidth])
      .padding(0.35);
    const by = d3.scaleLinear()
      .domain([0, d3.max(rows, (r) => r.amount) || 1])
      .range([subHeight, 0]);

    subchart.selectAll("*").remove();
    subchart.append("text")
      .attr("class", "sub-title")
      .attr("y", -10)
      .text(`Breakdown for ${year}`);
    subchart.selectAll("rect")
      .data(rows)
      .join("rect")
      .attr("x", (r) => bx(r.category))
      .attr("y", (r) => by(r.amount))
      .attr("width", bx.bandwidth())
      .attr("height", (r) => subHeight - by(r.amount))
      .attr("fill", "#9467bd");
    subchart.selectAll("text.cat")
      .data(rows)
      .join("text")
      .attr("class", "cat")
      .attr("x", (r) => bx(r.category) + bx.bandwidth() / 2)
      .attr("y", subHeight + 16)
      .attr("text-anchor", "middle")
      .text((r) => r.category);
  }

  function clearBreakdown() {
    subchart.selectAll("*").remove();
  }

  plot.append("g")
    .attr("id", "points")
    .selectAll("circle")
    .data(series)
    .join("circle")
    .attr("cx", (d) => x(d.year))
    .attr("cy", (d) => y(d.value))
    .attr("r", BASE_RADIUS)
    .attr("fill", BASE_FILL)
    .on("mouseover", function (event, d) {
      d3.select(this).attr("r", HOVER_RADIUS).attr("fill", HOVER_FILL);
    })
    .on("mouseout", function () {
      d3.select(this).attr("r", BASE_RADIUS).attr("fill", BASE_FILL);
      clearBreakdown();
    });
});
