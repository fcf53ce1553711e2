const width = 600;
const height = 440;
const BASE_FILL = "#4c78a8";
const HOVER_FILL = "#f58518";

const nodes = [
  { id: "ana" }, { id: "bo" }, { id: "cy" }, { id: "dee" },
  { id: "ed" }, { id: "flo" }, { id: "gil" }, { id: "hal" },
];

const links = [
  { source: "ana", target: "bo" },
  { source: "ana", target: "cy" },
  { source: "bo", target: "cy" },
  { source: "cy", target: "dee" },
  { source: "dee", target: "ed" },
  { source: "ed", target: "flo" },
  { source: "ed", target: "gil" },
  { source: "flo", target: "gil" },
  { source: "gil", target: "hal" },
  { source: "dee", target: "hal" },
];

const svg = d3.select("svg#chart").attr("width", width).attr("height", height);
const linkLayer = svg.append("g").attr("id", "links");
const nodeLayer = svg.append("g").attr("id", "nodes");

// settle the layout synchronously so every load renders the same picture
const sim = d3.forceSimulation(nodes)
  .force("link", d3.forceLink(links).id((d) => d.id).distance(70))
  .force("charge", d3.forceManyBody().strength(-160))
  .force("center", d3.forceCenter(width / 2, height / 2))
  .stop();
for (let i = 0; i < 200; i += 1) sim.tick();

const link = linkLayer.selectAll("line")
  .data(links)
  .join("line")
  .attr("stroke", "#bbb")
  .attr("stroke-width", 1.5);

const node = nodeLayer.selectAll("circle")
  .data(nodes)
  .join("circle")
  .attr("class", "node")
  .attr("r", 9)
  .attr("fill", BASE_FILL)
  .attr("data-id", (d) => d.id);

function position() {
  link
    .attr("x1", (d) => d.source.x)
    .attr("y1", (d) => d.source.y)
    .attr("x2", (d) => d.target.x)
    .attr("y2", (d) => d.target.y);
  node
    .attr("cx", (d) => d.x)
    .attr("cy", (d) => d.y);
}

position();

node
  .on("mouseover", function () {
    d3.select(this).attr("fill", HOVER_FILL);
  })
  .on("mouseout", function () {
    d3.select(this).attr("fill", BASE_FILL);
  });

node.on("click", function (event, d) {
  d.fx = d.x;
  d.fy = d.y;
  d3.select(this)
    .attr("data-pinned", "true")
    .attr("stroke", "#333")
    .attr("stroke-width", 2.5);
});

node.on("dblclick", function (event, d) {
  d.fx = null;
  d.fy = null;
  d3.select(this)
    .attr("data-pinned", null)
    .attr("stroke", null)
    .attr("stroke-width", null);
});

node.call(d3.drag().on("drag", function (event, d) {
  d.x += event.dx;
  d.y += event.dy;
  if (d.fx != null) {
    d.fx = d.x;
    d.fy = d.y;
  }
  position();
}));
