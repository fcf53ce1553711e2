const WIDTH = 700;
const HEIGHT = 460;
const MARGIN = { top: 20, right: 30, bottom: 44, left: 96 };

const svg = d3.select("svg#chart").attr("width", WIDTH).attr("height", HEIGHT);
const plot = svg.append("g")
  .attr("transform", `translate(${MARGIN.left},${MARGIN.top})`);
const plotWidth = WIDTH - MARGIN.left - MARGIN.right;
const plotHeight = HEIGHT - MARGIN.top - MARGIN.bottom;

d3.csv("data/values.csv", d3.autoType).then((data) => {
  // rank smallest at the top so the eye reads an ascending staircase
  data.sort((a, b) => a.value - b.value);

  const y = d3.scaleBand()
    .domain(data.map((d) => d.name))
    .range([0, plotHeight])
    .padding(0.25);

  const x = d3.scaleLinear()
    .domain([0, d3.max(data, (d) => d.value)])
    .nice()
    .range([0, plotWidth]);

  plot.append("g")
    .attr("id", "bars")
    .selectAll("rect")
    .data(data)
    .join("rect")
    .attr("y", (d) => y(d.name))
    .attr("x", 0)
    .attr("height", y.bandwidth())
    .attr("width", (d) => x(d.value))
    .attr("fill", "#d95f0e");

  plot.append("g")
    .attr("id", "x-axis")
    .attr("transform", `translate(0,${plotHeight})`)
    .call(d3.axisBottom(x));

  plot.append("g")
    .attr("id", "y-axis")
    .call(d3.axisLeft(y));
});
