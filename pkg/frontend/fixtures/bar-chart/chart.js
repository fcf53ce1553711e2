const width = 640;
const height = 400;
const margin = { top: 24, right: 16, bottom: 40, left: 48 };

const svg = d3.select("svg#chart")
  .attr("width", width)
  .attr("height", height);

const plot = svg.append("g")
  .attr("id", "plot")
  .attr("transform", `translate(${margin.left},${margin.top})`);

const innerWidth = width - margin.left - margin.right;
const innerHeight = height - margin.top - margin.bottom;

d3.csv("data/values.csv", d3.autoType).then((rows) => {
  rows.sort((a, b) => a.value - b.value);

  const x = d3.scaleBand()
    .domain(rows.map((r) => r.name))
    .range([0, innerWidth])
    .padding(0.2);

  const y = d3.scaleLinear()
    .domain([0, d3.max(rows, (r) => r.value)])
    .nice()
    .range([innerHeight, 0]);

  plot.append("g")
    .attr("id", "x-axis")
    .attr("transform", `translate(0,${innerHeight})`)
    .call(d3.axisBottom(x));

  plot.append("g")
    .attr("id", "y-axis")
    .call(d3.axisLeft(y));

  plot.append("g")
    .attr("id", "bars")
    .selectAll("rect")
    .data(rows)
    .join("rect")
    .attr("x", (d) => x(d.name))
    .attr("y", (d) => y(d.value))
    .attr("width", x.bandwidth())
    .attr("height", (d) => innerHeight - y(d.value))
    .attr("fill", "steelblue");
});
