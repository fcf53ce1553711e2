var dims = { w: 460, h: 300, top: 16, right: 12, bottom: 32, left: 40 };

function render(rows) {
  rows.sort(function (a, b) { return d3.ascending(a.value, b.value); });

  var plotW = dims.w - dims.left - dims.right;
  var plotH = dims.h - dims.top - dims.bottom;

  var svg = d3.select("svg#chart")
    .attr("width", dims.w)
    .attr("height", dims.h);

  var inner = svg.append("g")
    .attr("transform", "translate(" + dims.left + "," + dims.top + ")");

  var x = d3.scaleBand()
    .domain(rows.map(function (r) { return r.name; }))
    .range([0, plotW])
    .padding(0.1);

  var y = d3.scaleLinear()
    .domain([0, d3.max(rows, function (r) { return r.value; })])
    .range([plotH, 0]);

  inner.append("g")
    .attr("id", "bars")
    .selectAll("rect")
    .data(rows)
    .enter()
    .append("rect")
    .attr("x", function (d) { return x(d.name); })
    .attr("width", x.bandwidth())
    .attr("y", function (d) { return y(d.value); })
    .attr("height", function (d) { return plotH - y(d.value); })
    .attr("fill", "#2c7fb8");

  inner.append("g")
    .attr("id", "x-axis")
    .attr("transform", "translate(0," + plotH + ")")
    .call(d3.axisBottom(x).tickSizeOuter(0));

  inner.append("g")
    .attr("id", "y-axis")
    .call(d3.axisLeft(y).ticks(5));
}

d3.csv("data/values.csv", d3.autoType).then(render);
