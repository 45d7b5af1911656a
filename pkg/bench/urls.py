from rest_framework_nested import routers
from . import views

router = routers.DefaultRouter()

router.register('experiments', views.ExperimentViewSet, basename='experiments')
experiments_router = routers.NestedDefaultRouter(router, 'experiments', lookup='experiment')
experiments_router.register('records', views.TraceRecordViewSet, basename='experiment-records')

urlpatterns = router.urls + experiments_router.urls
