"""
URL configuration for core app.
"""
from django.urls import path
from . import views

urlpatterns = [
    # Run registry
    path('runs/', views.RunListView.as_view(), name='run_list'),
    path('runs/<int:pk>/', views.RunDetailView.as_view(), name='run_detail'),

    # Data export
    path('runs/<int:pk>/probe.csv', views.ExportProbeView.as_view(), name='run_probe_csv'),
]
