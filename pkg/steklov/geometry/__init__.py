from .charts import Chart, ChartMetric, chart_metric, chart_normal, metric_residual
from .mesh import (SurfaceMesh, TraceField, VolumeGrid, ball_grid, chart_graph_mesh, mesh_from_file,
                   shell_grid, sphere_mesh, sphere_quadrature_error, surface_gradient, write_mesh)
